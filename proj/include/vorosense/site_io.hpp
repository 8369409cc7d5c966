#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "vorosense/geometry.hpp"

namespace vorosense {

/// Parses `id,x,y` CSV (header required). Errors carry the 1-based line.
/// `line_numbers`, when given, receives the source line of each site.
std::vector<Site> read_sites_csv(std::istream& in, std::vector<std::size_t>* line_numbers = nullptr);
std::vector<Site> read_sites_csv(const std::filesystem::path& path,
                                 std::vector<std::size_t>* line_numbers = nullptr);

void write_sites_csv(std::ostream& out, const std::vector<Site>& sites);
void write_sites_csv(const std::filesystem::path& path, const std::vector<Site>& sites);

/// n sites drawn uniformly from the open box, ids 0..n-1.
std::vector<Site> generate_sites(std::size_t n, const BoundingBox& box, std::uint64_t seed);

}  // namespace vorosense
