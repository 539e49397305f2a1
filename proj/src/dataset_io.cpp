#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spog/error.hpp"
#include "spog/graph.hpp"

namespace spog {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& what) {
  throw ValidationError(file.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open file: " + p.string());
  return in;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_index(std::string_view tok, std::size_t& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

bool parse_real(std::string_view tok, double& out) {
  const std::string s(trim(tok));
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

std::vector<std::size_t> read_index_list(const json& j, const char* key, const fs::path& file) {
  if (!j.contains(key) || !j[key].is_array()) throw ValidationError(file.string() + ": missing array \"" + key + "\"");
  std::vector<std::size_t> out;
  for (const auto& v : j[key]) {
    if (!v.is_number_unsigned()) throw ValidationError(file.string() + ": non-index entry in \"" + key + "\"");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

Dataset load_dataset(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) throw ValidationError("missing file: " + manifest_path.string());
  json manifest;
  try {
    auto in = open(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(manifest_path.string() + ": " + e.what());
  }
  for (const char* key : {"n", "num_classes", "edges", "features", "labels", "splits"})
    if (!manifest.contains(key)) throw ValidationError(manifest_path.string() + ": missing key \"" + key + "\"");
  if (!manifest["n"].is_number_unsigned() || !manifest["num_classes"].is_number_unsigned())
    throw ValidationError(manifest_path.string() + ": n and num_classes must be nonnegative integers");

  const fs::path base = manifest_path.parent_path();
  const auto n = manifest["n"].get<std::size_t>();
  Dataset ds;
  ds.num_classes = manifest["num_classes"].get<std::size_t>();
  if (ds.num_classes < 2) throw ValidationError(manifest_path.string() + ": num_classes must be >= 2");

  // edges
  {
    const fs::path file = base / manifest["edges"].get<std::string>();
    auto in = open(file);
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto tab = line.find('\t');
      std::size_t u = 0, v = 0;
      if (tab == std::string::npos || !parse_index(std::string_view(line).substr(0, tab), u) ||
          !parse_index(std::string_view(line).substr(tab + 1), v))
        fail(file, lineno, "expected \"u<TAB>v\"");
      if (u >= n || v >= n) fail(file, lineno, "index out of range");
      if (u == v) fail(file, lineno, "self-loop");
      edges.emplace_back(u, v);
    }
    ds.graph = Graph(n, edges);
  }

  // features
  {
    const fs::path file = base / manifest["features"].get<std::string>();
    auto in = open(file);
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      std::size_t count = 0;
      std::string_view rest(line);
      while (true) {
        const auto comma = rest.find(',');
        double x = 0.0;
        if (!parse_real(rest.substr(0, comma), x)) fail(file, lineno, "malformed number");
        values.push_back(x);
        ++count;
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      if (rows == 0) cols = count;
      else if (count != cols) fail(file, lineno, "ragged feature row: " + std::to_string(count) + " values, expected " + std::to_string(cols));
      ++rows;
    }
    if (rows != n) fail(file, lineno, "expected " + std::to_string(n) + " feature rows, found " + std::to_string(rows));
    ds.features = DenseMatrix(rows, cols, std::move(values));
  }

  // labels
  {
    const fs::path file = base / manifest["labels"].get<std::string>();
    auto in = open(file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      std::size_t y = 0;
      if (!parse_index(line, y)) fail(file, lineno, "malformed label");
      if (y >= ds.num_classes) fail(file, lineno, "label out of range");
      ds.labels.push_back(y);
    }
    if (ds.labels.size() != n) fail(file, lineno, "expected " + std::to_string(n) + " labels, found " + std::to_string(ds.labels.size()));
  }

  // splits
  {
    const fs::path file = base / manifest["splits"].get<std::string>();
    json sj;
    try {
      auto in = open(file);
      sj = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError(file.string() + ": " + e.what());
    }
    ds.splits.train = read_index_list(sj, "train", file);
    ds.splits.val = read_index_list(sj, "val", file);
    ds.splits.test = read_index_list(sj, "test", file);
  }

  validate_dataset(ds);
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  validate_dataset(ds);
  fs::create_directories(dir);
  auto write = [&](const char* name, const std::string& content) {
    const fs::path tmp = dir / (std::string(name) + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw ValidationError("cannot write " + tmp.string());
      out << content;
    }
    fs::rename(tmp, dir / name);
  };

  std::ostringstream edges;
  for (auto [u, v] : ds.graph.edges()) edges << u << '\t' << v << '\n';
  write("edges.tsv", edges.str());

  std::ostringstream feats;
  char buf[32];
  for (std::size_t i = 0; i < ds.features.rows(); ++i) {
    for (std::size_t j = 0; j < ds.features.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features(i, j));
      feats << (j ? "," : "") << buf;
    }
    feats << '\n';
  }
  write("features.csv", feats.str());

  std::ostringstream labels;
  for (std::size_t y : ds.labels) labels << y << '\n';
  write("labels.csv", labels.str());

  json splits = {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}};
  write("splits.json", splits.dump() + "\n");

  json manifest = {{"n", ds.num_nodes()},
                   {"num_classes", ds.num_classes},
                   {"edges", "edges.tsv"},
                   {"features", "features.csv"},
                   {"labels", "labels.csv"},
                   {"splits", "splits.json"}};
  write("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace spog
