#include "gdl/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gdl/error.hpp"

namespace gdl::io {

namespace fs = std::filesystem;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing", "output");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::io, "write failed for " + tmp.string(), "output");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "rename to " + path.string() + " failed: " + ec.message(), "output");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string(), "input");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

fs::path sidecar(const fs::path& p) {
  fs::path s = p;
  s += ".json";
  return s;
}

json merged(json base, const json& extra) {
  if (extra.is_object())
    for (auto it = extra.begin(); it != extra.end(); ++it) base[it.key()] = it.value();
  return base;
}

}  // namespace

void write_measure(const fs::path& csv_path, const DiscreteMeasure& mu, const json& extra) {
  std::string out;
  const int n = mu.ambient_dim();
  for (int a = 0; a < n; ++a) out += "x" + std::to_string(a + 1) + ",";
  out += "w\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int a = 0; a < n; ++a) out += fmt(mu.point(i)[a]) + ",";
    out += fmt(mu.weight(i)) + "\n";
  }
  atomic_write(csv_path, out);
  json meta = {{"dim_d", mu.dim_d()},
               {"resolution_h", mu.resolution_h()},
               {"ambient_dim", n},
               {"count", mu.size()},
               {"total_mass", mu.total_mass()},
               {"seed", mu.seed()}};
  meta["ar_constant"] = mu.ar_constant() ? json(*mu.ar_constant()) : json(nullptr);
  atomic_write(sidecar(csv_path), merged(meta, extra).dump(2) + "\n");
}

DiscreteMeasure read_measure(const fs::path& csv_path) {
  json meta;
  try {
    meta = json::parse(read_file(sidecar(csv_path)));
  } catch (const json::exception& e) {
    throw Error(Errc::io, "bad measure sidecar: " + std::string(e.what()), "input");
  }
  std::istringstream in(read_file(csv_path));
  std::string line;
  std::getline(in, line);
  const int n = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (n < 1) throw Error(Errc::io, "measure CSV header must be x1,...,xn,w", "input");
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ls, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(Errc::io, "non-numeric CSV cell '" + cell + "'", "input");
      }
      ++cols;
    }
    if (cols != n + 1) throw Error(Errc::io, "ragged measure CSV row", "input");
  }
  const Eigen::Index count = static_cast<Eigen::Index>(vals.size()) / (n + 1);
  Eigen::MatrixXd pts(n, count);
  Eigen::VectorXd w(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (int a = 0; a < n; ++a) pts(a, i) = vals[static_cast<std::size_t>(i * (n + 1) + a)];
    w[i] = vals[static_cast<std::size_t>(i * (n + 1) + n)];
  }
  DiscreteMeasure mu(std::move(pts), std::move(w), meta.at("dim_d").get<double>(),
                     meta.at("resolution_h").get<double>());
  std::optional<double> ar;
  if (meta.contains("ar_constant") && meta["ar_constant"].is_number()) ar = meta["ar_constant"].get<double>();
  return mu.with_metadata(ar, meta.value("seed", std::uint64_t{0}));
}

namespace {

json grid_header(const ScalarGrid& g) {
  json h;
  const Box b = g.box();
  h["box"] = {{"lo", std::vector<double>(b.lo.data(), b.lo.data() + b.lo.size())},
              {"hi", std::vector<double>(b.hi.data(), b.hi.data() + b.hi.size())}};
  h["shape"] = g.shape();
  std::vector<double> sp;
  for (int a = 0; a < g.dim(); ++a) sp.push_back(g.spacing(a));
  h["spacing"] = sp;
  h["uniform"] = g.is_uniform();
  if (!g.is_uniform()) {
    json axes = json::array();
    for (int a = 0; a < g.dim(); ++a) axes.push_back(g.axis(a));
    h["axes"] = axes;
  }
  return h;
}

}  // namespace

void write_grid_csv(const fs::path& path, const ScalarGrid& g, const json& extra) {
  std::string out = "index";
  for (int a = 0; a < g.dim(); ++a) out += ",x" + std::to_string(a + 1);
  out += ",value\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    out += std::to_string(k);
    for (int a = 0; a < g.dim(); ++a) out += "," + fmt(g.coord(k, a));
    out += "," + fmt(g[k]) + "\n";
  }
  atomic_write(path, out);
  if (!extra.is_null()) atomic_write(sidecar(path), merged(grid_header(g), extra).dump(2) + "\n");
}

void write_grid_binary(const fs::path& path, const ScalarGrid& g, const json& extra) {
  std::string out(g.size() * 8, '\0');
  for (std::size_t k = 0; k < g.size(); ++k) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(g[k]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    for (int b = 0; b < 8; ++b) out[k * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  atomic_write(path, out);
  json h = grid_header(g);
  h["format"] = "float64-le";
  atomic_write(sidecar(path), merged(h, extra).dump(2) + "\n");
}

ScalarGrid read_grid_binary(const fs::path& path) {
  json h;
  try {
    h = json::parse(read_file(sidecar(path)));
  } catch (const json::exception& e) {
    throw Error(Errc::io, "bad grid header: " + std::string(e.what()), "input");
  }
  std::vector<Axis> axes;
  if (h.contains("axes")) {
    for (const auto& ax : h["axes"]) axes.push_back(ax.get<Axis>());
  } else {
    const auto lo = h["box"]["lo"].get<std::vector<double>>();
    const auto hi = h["box"]["hi"].get<std::vector<double>>();
    const auto shape = h["shape"].get<std::vector<int>>();
    for (std::size_t a = 0; a < shape.size(); ++a) axes.push_back(uniform_axis(lo[a], hi[a], shape[a] - 1));
  }
  ScalarGrid g(std::move(axes));
  const std::string raw = read_file(path);
  if (raw.size() != g.size() * 8) throw Error(Errc::io, "grid binary size does not match its header", "input");
  for (std::size_t k = 0; k < g.size(); ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[k * 8 + b])) << (8 * b);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    g[k] = std::bit_cast<double>(bits);
  }
  return g;
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Ball& b) { return {{"center", to_json(b.center)}, {"radius", b.radius}}; }

json to_json(const AffinePlane& p) {
  json frame = json::array();
  for (Eigen::Index j = 0; j < p.frame().cols(); ++j) frame.push_back(to_json(Eigen::VectorXd(p.frame().col(j))));
  return {{"base", to_json(p.base())}, {"frame", frame}};
}

}  // namespace gdl::io
