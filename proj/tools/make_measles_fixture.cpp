// Writes the synthetic measles-shaped incidence table used by the tests:
//   make_measles_fixture <out-dir>   ->   cases.csv, populations.csv

#include <filesystem>
#include <iostream>

#include "measles_fixture.hpp"

int main(int argc, char **argv) {
  if (argc != 2) {
    std::cerr << "usage: make_measles_fixture <out-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const auto [cases, pops] = sidiff::io::series_csv(sidiff::fixtures::measles_like_table());
  sidiff::io::write_atomic(dir / "cases.csv", cases);
  sidiff::io::write_atomic(dir / "populations.csv", pops);
  std::cout << "wrote " << (dir / "cases.csv").string() << " and "
            << (dir / "populations.csv").string() << "\n";
  return 0;
}
