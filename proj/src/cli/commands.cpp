#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "vorosense/cli.hpp"
#include "vorosense/dynamic.hpp"
#include "vorosense/etl_sim.hpp"
#include "vorosense/json_io.hpp"
#include "vorosense/rng.hpp"
#include "vorosense/site_io.hpp"
#include "vorosense/svg.hpp"

namespace vorosense {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 0;
  unsigned bits = kDefaultBitsPerDim;
  std::string box = "0,0,1000,1000";
  std::string out;
  std::string manifest;
};

// Set by `replay` so a simulation reruns from the recorded configuration
// rather than whatever the config file holds now.
struct Context {
  std::vector<std::string> argv;
  std::optional<json> config_override;
};

template <typename T>
T parse_number(std::string_view text, const std::string& what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::UsageError, fmt::format("{}: cannot parse '{}'", what, text));
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, std::size_t count, const std::string& what) {
  std::vector<T> values;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    values.push_back(parse_number<T>(rest.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (values.size() != count) {
    throw Error(ErrorCode::UsageError,
                fmt::format("{}: expected {} comma-separated values, got '{}'", what, count, text));
  }
  return values;
}

BoundingBox parse_box(const std::string& text) {
  const auto v = parse_list<double>(text, 4, "--box");
  return BoundingBox({v[0], v[1]}, {v[2], v[3]});
}

json box_json(const BoundingBox& b) { return {b.min().x, b.min().y, b.max().x, b.max().y}; }

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

// Output goes to --out when given, otherwise to stdout.
void emit(const Globals& g, std::ostream& out, std::string_view text) {
  if (g.out.empty()) {
    out << text;
  } else {
    write_file(g.out, text);
  }
}

void write_manifest(const fs::path& path, const Context& ctx, const std::string& subcommand,
                    const Globals& g, json config, const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "vorosense";
  m["version"] = kToolVersion;
  m["subcommand"] = subcommand;
  m["seed"] = g.seed;
  m["argv"] = ctx.argv;
  m["config"] = std::move(config);
  m["outputs"] = outputs;
  write_file(path, dump(m));
}

// Manifest goes to --manifest, else next to the --out file.
void maybe_manifest(const Context& ctx, const std::string& subcommand, const Globals& g,
                    json config, std::vector<std::string> outputs) {
  fs::path path = g.manifest;
  if (path.empty()) {
    if (g.out.empty()) return;
    path = g.out + ".manifest.json";
  }
  if (!g.out.empty()) outputs.insert(outputs.begin(), g.out);
  write_manifest(path, ctx, subcommand, g, std::move(config), outputs);
}

json global_config(const Globals& g) {
  json c;
  c["bits"] = g.bits;
  c["box"] = box_json(parse_box(g.box));
  return c;
}

// Reads a site file and checks what the builder would reject, so errors can
// point at the offending line.
std::vector<Site> load_sites(const std::string& path, const BoundingBox& box) {
  std::vector<std::size_t> lines;
  auto sites = read_sites_csv(fs::path(path), &lines);
  std::vector<std::size_t> order(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    order[i] = i;
    if (!box.strictly_contains(sites[i].position)) {
      throw Error(ErrorCode::SiteOutsideBox,
                  fmt::format("{}: line {}: site {} is not strictly inside the box {}", path,
                              lines[i], sites[i].id, box_json(box).dump()));
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(sites[a].id, lines[a]) < std::pair(sites[b].id, lines[b]);
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (sites[order[k]].id == sites[order[k - 1]].id) {
      throw Error(ErrorCode::DuplicateSite,
                  fmt::format("{}: line {}: site id {} already used on line {}", path,
                              lines[order[k]], sites[order[k]].id, lines[order[k - 1]]));
    }
  }
  return sites;
}

RenderStyle make_style(int size, const std::string& scheme) {
  RenderStyle style;
  style.image_size = size;
  style.color_scheme = scheme;
  style.validate();
  return style;
}

void cmd_gen_sites(const Context& ctx, const Globals& g, std::ostream& out, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidParams, "--n must be at least 1");
  const BoundingBox box = parse_box(g.box);
  json config = global_config(g);
  config["n"] = n;
  maybe_manifest(ctx, "gen-sites", g, std::move(config), {});
  std::ostringstream csv;
  write_sites_csv(csv, generate_sites(n, box, g.seed));
  emit(g, out, csv.str());
}

struct VoronoiArgs {
  std::string sites;
  std::string stats;
  int size = 800;
  std::string scheme = "pastel";
  bool timing = false;
};

void cmd_voronoi(const Context& ctx, const Globals& g, std::ostream& out, const VoronoiArgs& a) {
  const BoundingBox box = parse_box(g.box);
  const RenderStyle style = make_style(a.size, a.scheme);
  json config = global_config(g);
  config["sites"] = a.sites;
  config["size"] = a.size;
  config["scheme"] = a.scheme;
  config["timing"] = a.timing;
  std::vector<std::string> outputs;
  if (!a.stats.empty()) outputs.push_back(a.stats);
  maybe_manifest(ctx, "voronoi", g, std::move(config), outputs);

  const auto sites = load_sites(a.sites, box);
  const VoronoiDiagram diagram = build_voronoi(sites, box);
  emit(g, out, render_svg(diagram, style));
  if (!a.stats.empty()) {
    json j;
    j["seed"] = g.seed;
    j["sites"] = diagram.sites().size();
    j["vertices"] = diagram.vertices().size();
    j["edges"] = diagram.edges().size();
    j["stats"] = stats_to_json(diagram.stats(), a.timing);
    write_file(a.stats, dump(j));
  }
}

struct DynamicArgs {
  std::string sites;
  std::size_t ticks = 10;
  std::string motion = "bounce";
  double speed = 10.0;
  double dt = 0.1;
  int size = 800;
  std::string scheme = "pastel";
};

// Per-site motion derived from the seed so a run is fully reproducible.
MotionModel make_motion(const DynamicArgs& a, const BoundingBox& box, std::uint64_t seed,
                        SiteId id) {
  Rng rng(derive_seed(seed, id));
  if (a.motion == "static") return ConstantVelocity{{0.0, 0.0}};
  if (a.motion == "bounce") {
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return ConstantVelocity{{a.speed * std::cos(angle), a.speed * std::sin(angle)}};
  }
  if (a.motion == "walk") return RandomWalk{a.speed * a.dt};
  WaypointLoop loop;
  loop.speed = a.speed;
  for (int i = 0; i < 4; ++i) {
    loop.waypoints.push_back({rng.uniform(box.min().x, box.max().x),
                              rng.uniform(box.min().y, box.max().y)});
  }
  return loop;
}

void cmd_dynamic(const Context& ctx, const Globals& g, const DynamicArgs& a) {
  if (g.out.empty()) throw Error(ErrorCode::UsageError, "dynamic needs --out <directory>");
  if (a.ticks < 1) throw Error(ErrorCode::InvalidParams, "--ticks must be at least 1");
  if (!(a.dt > 0.0) || !(a.speed >= 0.0)) {
    throw Error(ErrorCode::InvalidParams, "--dt must be positive and --speed non-negative");
  }
  const BoundingBox box = parse_box(g.box);
  const RenderStyle style = make_style(a.size, a.scheme);
  const fs::path dir = g.out;

  json config = global_config(g);
  config["sites"] = a.sites;
  config["ticks"] = a.ticks;
  config["motion"] = a.motion;
  config["speed"] = a.speed;
  config["dt"] = a.dt;
  config["size"] = a.size;
  config["scheme"] = a.scheme;
  std::vector<std::string> outputs{(dir / "frames.json").string()};
  fs::path manifest = g.manifest.empty() ? dir / "manifest.json" : fs::path(g.manifest);
  write_manifest(manifest, ctx, "dynamic", g, std::move(config), outputs);

  DynamicWorld world{{}, box, 0, a.dt, g.seed};
  for (const Site& s : load_sites(a.sites, box)) {
    world.sites.push_back({s, make_motion(a, box, g.seed, s.id)});
  }
  const auto frames = run_dynamic(world, a.ticks);

  json index;
  index["seed"] = g.seed;
  index["motion"] = a.motion;
  index["dt"] = a.dt;
  json list = json::array();
  for (const FrameRecord& f : frames) {
    const std::string name = fmt::format("frame_{:06}.svg", f.tick);
    write_file(dir / name, render_svg(*f.diagram, style));
    json entry;
    entry["tick"] = f.tick;
    entry["file"] = name;
    entry["stats"] = stats_to_json(f.stats);
    list.push_back(std::move(entry));
  }
  index["frames"] = std::move(list);
  write_file(dir / "frames.json", dump(index));
}

std::string grid_hint(const Globals& g) {
  return fmt::format(" (usage: coordinates must be below 2^bits = {}; raise --bits, max 32)",
                     std::uint64_t{1} << g.bits);
}

void cmd_morton_encode(const Globals& g, std::ostream& out, std::uint64_t ix, std::uint64_t iy) {
  const ZCurve curve(g.bits);
  if (ix >= curve.cells_per_axis() || iy >= curve.cells_per_axis()) {
    throw Error(ErrorCode::CoordOutOfGrid,
                fmt::format("cell ({}, {}) is outside the grid", ix, iy) + grid_hint(g));
  }
  emit(g, out, fmt::format("{}\n", curve.encode(static_cast<std::uint32_t>(ix),
                                                 static_cast<std::uint32_t>(iy)).value));
}

void cmd_morton_decode(const Globals& g, std::ostream& out, std::uint64_t key) {
  const CellCoord c = ZCurve(g.bits).decode(MortonKey{key});
  emit(g, out, fmt::format("{} {}\n", c.ix, c.iy));
}

SearchExtent checked_extent(const Globals& g, const std::vector<std::uint64_t>& v) {
  const ZCurve curve(g.bits);
  for (std::uint64_t c : v) {
    if (c >= curve.cells_per_axis()) {
      throw Error(ErrorCode::CoordOutOfGrid,
                  fmt::format("extent coordinate {} is outside the grid", c) + grid_hint(g));
    }
  }
  const auto u = [](std::uint64_t c) { return static_cast<std::uint32_t>(c); };
  SearchExtent e{{u(v[0]), u(v[1])}, {u(v[2]), u(v[3])}};
  curve.validate(e);
  return e;
}

void cmd_morton_decompose(const Globals& g, std::ostream& out,
                          const std::vector<std::uint64_t>& v, std::size_t max_ranges) {
  const SearchExtent extent = checked_extent(g, v);
  json ranges = json::array();
  for (const KeyRange& r : ZCurve(g.bits).decompose(extent, max_ranges)) {
    ranges.push_back({r.lo.value, r.hi.value});
  }
  emit(g, out, ranges.dump() + "\n");
}

void cmd_simulate(const Context& ctx, const Globals& g, bool seed_given, std::ostream& out,
                  std::ostream& err, const std::string& config_path, const std::string& snapshot) {
  json raw = ctx.config_override ? *ctx.config_override : parse_json_file(config_path);
  if (seed_given) raw["seed"] = g.seed;
  PipelineConfig config = config_from_json(raw);
  Globals resolved = g;
  resolved.seed = config.seed;
  std::vector<std::string> outputs;
  if (!snapshot.empty()) outputs.push_back(snapshot);
  maybe_manifest(ctx, "simulate", resolved, config_to_json(config), outputs);

  const SimOutcome outcome = run_pipeline(config);
  const SimReport& r = outcome.report;
  emit(g, out, dump(report_to_json(r)));
  if (!snapshot.empty()) write_snapshot(snapshot, outcome.index.scan_all());
  std::ostream& summary = g.out.empty() ? err : out;
  summary << fmt::format(
      "published={} served={} sojourn_empirical={:.6f}s sojourn_predicted={:.6f}s seed={}\n",
      r.published, r.served, r.mean_sojourn_s, r.kingman_prediction_s, r.seed);
}

void cmd_query(const Context& ctx, const Globals& g, std::ostream& out,
               const std::string& snapshot, const std::string& extent_text) {
  const auto v = parse_list<std::uint64_t>(extent_text, 4, "--extent");
  const SearchExtent extent = checked_extent(g, v);
  json config = global_config(g);
  config["snapshot"] = snapshot;
  config["extent"] = v;
  maybe_manifest(ctx, "query", g, std::move(config), {});

  OrderedIndex index(GridQuantizer(parse_box(g.box), g.bits));
  for (Record& rec : read_snapshot(snapshot)) index.insert(std::move(rec));
  const auto& q = index.quantizer();
  json records = json::array();
  for (const Record& rec : index.range_search(extent)) {
    const CellCoord c = q.curve().decode(rec.key);
    const Point p = q.dequantize(c);
    json j;
    j["key"] = rec.key.value;
    j["site_id"] = rec.site_id;
    j["timestamp_us"] = rec.timestamp_us;
    j["cell"] = {c.ix, c.iy};
    j["position"] = {p.x, p.y};
    std::string hex;
    for (std::uint8_t b : rec.payload) hex += fmt::format("{:02x}", b);
    j["payload"] = hex;
    records.push_back(std::move(j));
  }
  json result;
  result["seed"] = g.seed;
  result["extent"] = v;
  result["count"] = records.size();
  result["records"] = std::move(records);
  emit(g, out, dump(result));
}

void cmd_index_build(const Context& ctx, const Globals& g, const std::string& sites_path) {
  if (g.out.empty()) throw Error(ErrorCode::UsageError, "index build needs --out <snapshot>");
  json config = global_config(g);
  config["sites"] = sites_path;
  maybe_manifest(ctx, "index build", g, std::move(config), {});
  OrderedIndex index(GridQuantizer(parse_box(g.box), g.bits));
  for (const Site& s : read_sites_csv(fs::path(sites_path))) {
    index.insert({index.quantizer().key_of(s.position), s.id, 0, {}});
  }
  write_snapshot(g.out, index.scan_all());
}

int dispatch(Context ctx, std::ostream& out, std::ostream& err);

void cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err, int& rc) {
  const json m = parse_json_file(manifest_path);
  if (!m.contains("argv") || !m.at("argv").is_array()) {
    throw Error(ErrorCode::ParseError, manifest_path + ": manifest has no argv list");
  }
  Context ctx;
  ctx.argv = m.at("argv").get<std::vector<std::string>>();
  if (m.value("subcommand", "") == "simulate" && m.contains("config")) {
    ctx.config_override = m.at("config");
  }
  rc = dispatch(std::move(ctx), out, err);
}

int dispatch(Context ctx, std::ostream& out, std::ostream& err) {
  CLI::App app{"Voronoi diagrams, Morton-keyed spatial index and sensor pipeline simulation",
               "vorosense"};
  app.set_version_flag("--version", kToolVersion);
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed (default 0)");
  app.add_option("--bits", g.bits, "Grid bits per dimension")->check(CLI::Range(1u, 32u));
  app.add_option("--box", g.box, "World box x0,y0,x1,y1")->capture_default_str();
  app.add_option("--out", g.out, "Output path (directory for dynamic)");
  app.add_option("--manifest", g.manifest, "Where to write the run manifest");

  std::size_t n = 0;
  auto* gen = app.add_subcommand("gen-sites", "Write n random sites as id,x,y CSV");
  gen->add_option("--n", n, "Number of sites")->required();

  VoronoiArgs va;
  auto* vor = app.add_subcommand("voronoi", "Build a Voronoi diagram and render it to SVG");
  vor->add_option("--sites", va.sites, "Sites CSV")->required();
  vor->add_option("--stats", va.stats, "Write diagram statistics JSON here");
  vor->add_option("--size", va.size, "Image size in pixels")->capture_default_str();
  vor->add_option("--scheme", va.scheme, "pastel or mono")->capture_default_str();
  vor->add_flag("--timing", va.timing, "Include build wall time in the statistics");

  DynamicArgs da;
  auto* dyn = app.add_subcommand("dynamic", "Move sites and render one diagram per tick");
  dyn->add_option("--sites", da.sites, "Sites CSV")->required();
  dyn->add_option("--ticks", da.ticks, "Number of frames")->capture_default_str();
  dyn->add_option("--motion", da.motion, "Motion model")
      ->check(CLI::IsMember({"static", "bounce", "walk", "waypoint"}))
      ->capture_default_str();
  dyn->add_option("--speed", da.speed, "World units per second")->capture_default_str();
  dyn->add_option("--dt", da.dt, "Virtual seconds per tick")->capture_default_str();
  dyn->add_option("--size", da.size, "Image size in pixels")->capture_default_str();
  dyn->add_option("--scheme", da.scheme, "pastel or mono")->capture_default_str();

  auto* morton = app.add_subcommand("morton", "Morton key tools");
  morton->require_subcommand(1);
  std::uint64_t ix = 0, iy = 0, key = 0;
  auto* enc = morton->add_subcommand("encode", "Print the key of cell (ix, iy)");
  enc->add_option("ix", ix)->required();
  enc->add_option("iy", iy)->required();
  auto* dec = morton->add_subcommand("decode", "Print the cell of a key");
  dec->add_option("key", key)->required();
  std::vector<std::uint64_t> rect;
  std::size_t max_ranges = kUnboundedRanges;
  auto* decomp = morton->add_subcommand("decompose", "Key ranges covering a cell rectangle");
  decomp->add_option("rect", rect, "x0 y0 x1 y1")->expected(4)->required();
  decomp->add_option("--max-ranges", max_ranges, "Range budget");

  std::string config_path, snapshot;
  auto* sim = app.add_subcommand("simulate", "Run the publisher/queue/index pipeline");
  sim->add_option("--config", config_path, "Pipeline config JSON")->required();
  sim->add_option("--snapshot", snapshot, "Also write the index snapshot here");

  std::string extent;
  auto* query = app.add_subcommand("query", "Range search over an index snapshot");
  query->add_option("--snapshot", snapshot, "Index snapshot")->required();
  query->add_option("--extent", extent, "Cell rectangle x0,y0,x1,y1")->required();

  auto* index = app.add_subcommand("index", "Index tools");
  index->require_subcommand(1);
  std::string sites_path;
  auto* build = index->add_subcommand("build", "Index sites by cell and write a snapshot");
  build->add_option("--sites", sites_path, "Sites CSV")->required();

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_path)->required();

  try {
    std::vector<std::string> reversed(ctx.argv.rbegin(), ctx.argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "ERROR " << to_string(ErrorCode::UsageError) << ": " << msg << "\n";
    return 2;
  }

  if (*gen) {
    cmd_gen_sites(ctx, g, out, n);
  } else if (*vor) {
    cmd_voronoi(ctx, g, out, va);
  } else if (*dyn) {
    cmd_dynamic(ctx, g, da);
  } else if (*enc) {
    cmd_morton_encode(g, out, ix, iy);
  } else if (*dec) {
    cmd_morton_decode(g, out, key);
  } else if (*decomp) {
    cmd_morton_decompose(g, out, rect, max_ranges);
  } else if (*sim) {
    cmd_simulate(ctx, g, seed_opt->count() > 0, out, err, config_path, snapshot);
  } else if (*query) {
    cmd_query(ctx, g, out, snapshot, extent);
  } else if (*build) {
    cmd_index_build(ctx, g, sites_path);
  } else if (*replay) {
    int rc = 0;
    cmd_replay(manifest_path, out, err, rc);
    return rc;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto fail = [&](ErrorCode code, std::string msg) {
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "ERROR " << to_string(code) << ": " << msg << "\n";
    return code == ErrorCode::UsageError ? 2 : 1;
  };
  try {
    return dispatch({args, std::nullopt}, out, err);
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const json::exception& e) {
    return fail(ErrorCode::ParseError, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorCode::IoError, e.what());
  }
}

}  // namespace vorosense
