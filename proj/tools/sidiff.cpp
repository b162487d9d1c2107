#include "sidiff_cli.hpp"

int main(int argc, char **argv) { return sidiff::cli::run(argc, argv); }
