#include "vorosense/site_io.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <string>
#include <string_view>

#include "vorosense/rng.hpp"

namespace vorosense {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    parse_error(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<Site> read_sites_csv(std::istream& in, std::vector<std::size_t>* line_numbers) {
  std::vector<Site> sites;
  std::string raw;
  std::size_t line = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = trim(raw);
    if (line == 1 && text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != "id,x,y") parse_error(line, "expected header 'id,x,y'");
      header_seen = true;
      continue;
    }
    const auto c1 = text.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
    if (c2 == std::string_view::npos || text.find(',', c2 + 1) != std::string_view::npos) {
      parse_error(line, "expected three comma-separated fields");
    }
    Site s;
    s.id = parse_field<SiteId>(text.substr(0, c1), line, "id");
    s.position.x = parse_field<double>(text.substr(c1 + 1, c2 - c1 - 1), line, "x");
    s.position.y = parse_field<double>(text.substr(c2 + 1), line, "y");
    if (!is_finite(s.position)) parse_error(line, "coordinates must be finite");
    sites.push_back(s);
    if (line_numbers) line_numbers->push_back(line);
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "line 1: missing header 'id,x,y'");
  return sites;
}

std::vector<Site> read_sites_csv(const std::filesystem::path& path,
                                 std::vector<std::size_t>* line_numbers) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_sites_csv(in, line_numbers);
}

void write_sites_csv(std::ostream& out, const std::vector<Site>& sites) {
  out << "id,x,y\n";
  for (const Site& s : sites) out << fmt::format("{},{},{}\n", s.id, s.position.x, s.position.y);
}

void write_sites_csv(const std::filesystem::path& path, const std::vector<Site>& sites) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_sites_csv(out, sites);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::vector<Site> generate_sites(std::size_t n, const BoundingBox& box, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Site> sites;
  sites.reserve(n);
  // Half-ulp offset keeps draws off the box edges.
  const auto open_unit = [&] { return rng.uniform() + 0x1.0p-54; };
  for (std::size_t i = 0; i < n; ++i) {
    const double x = box.min().x + box.width() * open_unit();
    const double y = box.min().y + box.height() * open_unit();
    sites.push_back({static_cast<SiteId>(i), {x, y}});
  }
  return sites;
}

}  // namespace vorosense
