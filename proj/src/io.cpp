#include "sae/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "sae/errors.hpp"

namespace sae {

namespace {

std::vector<std::string_view> tokens(std::string_view line, char sep = 0) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  auto is_sep = [&](char c) { return sep ? c == sep : (c == ' ' || c == '\t' || c == '\r'); };
  if (sep) {
    while (true) {
      const std::size_t q = line.find(sep, p);
      out.push_back(line.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
      if (q == std::string_view::npos) break;
      p = q + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().remove_suffix(1);
    return out;
  }
  while (p < line.size()) {
    while (p < line.size() && is_sep(line[p])) ++p;
    std::size_t q = p;
    while (q < line.size() && !is_sep(line[q])) ++q;
    if (q > p) out.push_back(line.substr(p, q - p));
    p = q;
  }
  return out;
}

bool is_blank(std::string_view line) { return tokens(line).empty(); }

double parse_real(std::string_view tok, const std::string& source, long line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ParseError(source, line, "expected a finite real, got '" + std::string(tok) + "'");
  return v;
}

std::size_t parse_count(std::string_view tok, const std::string& source, long line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(source, line, "expected a non-negative integer, got '" + std::string(tok) + "'");
  return v;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::string hex_encode(BitView bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (bits.n_bits + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    int v = 0;
    for (std::size_t q = 0; q < 4; ++q) {
      const std::size_t b = d * 4 + q;
      if (b < bits.n_bits && bits.test(b)) v |= 8 >> q;
    }
    out[d] = kDigits[v];
  }
  return out;
}

FingerprintSet read_fingerprints(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  std::size_t n_bits = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto tok = tokens(line);
    if (tok.size() != 2 || tok[0] != "n_bits") throw ParseError(source, line_no, "expected 'n_bits <integer>'");
    n_bits = parse_count(tok[1], source, line_no);
    if (n_bits == 0) throw ParseError(source, line_no, "n_bits must be positive");
    break;
  }
  if (n_bits == 0) throw ParseError(source, line_no, "missing 'n_bits' header");

  FingerprintSet fps(n_bits);
  const std::size_t digits = (n_bits + 3) / 4;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = tokens(line, '\t');
    if (fields.size() != 2 || fields[0].empty())
      throw ParseError(source, line_no, "expected '<sample_id>\\t<hex>'");
    const std::string_view hex = fields[1];
    if (hex.size() != digits)
      throw ParseError(source, line_no,
                       fmt::format("expected {} hex digits for {} bits, got {}", digits, n_bits, hex.size()));
    BitVector bits(n_bits);
    for (std::size_t d = 0; d < digits; ++d) {
      const int v = hex_value(hex[d]);
      if (v < 0) throw ParseError(source, line_no, fmt::format("invalid hex digit '{}'", hex[d]));
      for (std::size_t q = 0; q < 4; ++q) {
        if (!(v & (8 >> q))) continue;
        const std::size_t b = d * 4 + q;
        if (b >= n_bits) throw ParseError(source, line_no, "padding bits past n_bits must be zero");
        bits.set(b);
      }
    }
    const std::string id(fields[0]);
    if (fps.find(id) != fps.size()) throw ParseError(source, line_no, "duplicate sample id '" + id + "'");
    fps.add(id, bits);
  }
  return fps;
}

void write_fingerprints(std::ostream& out, const FingerprintSet& fps) {
  out << "n_bits " << fps.n_bits() << '\n';
  for (std::size_t i = 0; i < fps.size(); ++i) out << fps.id(i) << '\t' << hex_encode(fps.row(i)) << '\n';
}

SimilarityMatrix read_matrix(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  bool have_header = false;
  std::size_t n = 0;
  std::optional<double> tau;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto tok = tokens(line);
    if ((tok.size() != 2 && tok.size() != 4) || tok[0] != "n" || (tok.size() == 4 && tok[2] != "tau"))
      throw ParseError(source, line_no, "expected 'n <integer> [tau <real>]'");
    n = parse_count(tok[1], source, line_no);
    if (n < 2) throw ParseError(source, line_no, "matrix needs n >= 2");
    if (tok.size() == 4) {
      tau = parse_real(tok[3], source, line_no);
      if (!(*tau > 0.0 && *tau <= 1.0)) throw ParseError(source, line_no, "tau must lie in (0, 1]");
    }
    have_header = true;
  }
  if (!have_header) throw ParseError(source, line_no, "missing matrix header");

  std::vector<SimilarityTriple> triples;
  std::unordered_set<std::uint64_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto tok = tokens(line);
    if (tok.size() != 3) throw ParseError(source, line_no, "expected '<i> <j> <value>'");
    const std::size_t i = parse_count(tok[0], source, line_no);
    const std::size_t j = parse_count(tok[1], source, line_no);
    const double v = parse_real(tok[2], source, line_no);
    if (!(i < j && j < n)) throw ParseError(source, line_no, fmt::format("pair ({}, {}) is not i < j < {}", i, j, n));
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError(source, line_no, "similarity outside [0, 1]");
    if (tau && v < *tau) throw ParseError(source, line_no, "sparse matrix stores a value below tau");
    if (!seen.insert(static_cast<std::uint64_t>(i) * n + j).second)
      throw ParseError(source, line_no, fmt::format("duplicate pair ({}, {})", i, j));
    triples.push_back({i, j, v});
  }
  return SimilarityMatrix::from_triples(n, triples, tau);
}

void write_matrix(std::ostream& out, const SimilarityMatrix& s) {
  out << "n " << s.size();
  if (s.tau()) out << " tau " << format_real(*s.tau());
  out << '\n';
  if (s.is_sparse()) {
    for (const auto& t : s.triples()) out << t.i << ' ' << t.j << ' ' << format_real(t.value) << '\n';
    return;
  }
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) out << i << ' ' << j << ' ' << format_real(s.at(i, j)) << '\n';
}

std::vector<double> read_similarity_values(std::istream& in, const std::string& source) {
  std::vector<double> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = tokens(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok.size() != 1) throw ParseError(source, line_no, "expected one value per line");
    const double v = parse_real(tok[0], source, line_no);
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError(source, line_no, "similarity outside [0, 1]");
    out.push_back(v);
  }
  return out;
}

namespace {

std::vector<double> parse_list(std::string_view text, const std::string& source, long line) {
  std::vector<double> out;
  for (auto tok : tokens(text, ',')) {
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    out.push_back(parse_real(tok, source, line));
  }
  return out;
}

}  // namespace

DistributionRequest read_distribution_request(std::istream& in, const std::filesystem::path& base_dir,
                                              const std::string& source) {
  DistributionRequest req;
  bool have_kind = false, have_alpha = false, have_min = false, have_max = false;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = tokens(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value");
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
      return s;
    };
    const std::string_view key = trim(std::string_view(line).substr(0, eq));
    const std::string_view value = trim(std::string_view(line).substr(eq + 1));
    if (key == "kind") {
      have_kind = true;
      if (value == "balanced")
        req.kind = DistributionKind::kBalanced;
      else if (value == "mimic")
        req.kind = DistributionKind::kMimic;
      else if (value == "bounded")
        req.kind = DistributionKind::kBounded;
      else if (value == "custom")
        req.kind = DistributionKind::kCustom;
      else
        throw ParseError(source, line_no, "unknown kind '" + std::string(value) + "'");
    } else if (key == "alpha") {
      req.alpha = parse_real(value, source, line_no);
      have_alpha = true;
    } else if (key == "boundaries") {
      req.boundaries = parse_list(value, source, line_no);
    } else if (key == "expected") {
      req.expected = parse_list(value, source, line_no);
    } else if (key == "external") {
      req.external_path = std::string(value);
    } else if (key == "min_sim") {
      req.min_sim = parse_real(value, source, line_no);
      have_min = true;
    } else if (key == "max_sim") {
      req.max_sim = parse_real(value, source, line_no);
      have_max = true;
    } else {
      throw ParseError(source, line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_kind) throw SpecError(source + ": missing 'kind'");
  if (!have_alpha) throw SpecError(source + ": missing 'alpha'");
  if (req.kind == DistributionKind::kCustom && req.expected.empty())
    throw SpecError(source + ": custom spec needs 'expected'");
  if (req.kind == DistributionKind::kBounded && !have_min && !have_max)
    throw SpecError(source + ": bounded spec needs 'min_sim' and/or 'max_sim'");
  if (req.kind == DistributionKind::kMimic) {
    if (req.external_path.empty()) throw SpecError(source + ": mimic spec needs 'external'");
    std::filesystem::path p(req.external_path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    std::ifstream ext(p);
    if (!ext) throw SpecError(source + ": cannot open external similarity file '" + p.string() + "'");
    req.external = read_similarity_values(ext, p.string());
  }
  return req;
}

Split SplitFile::split() const {
  Split s;
  for (std::size_t i = 0; i < is_test.size(); ++i) (is_test[i] ? s.test : s.train).push_back(i);
  return s;
}

SplitFile make_split_file(const std::vector<std::string>& ids, const Split& split, std::span<const double> weights,
                          double alpha, double loss, double gap) {
  SplitFile f;
  f.alpha = alpha;
  f.loss = loss;
  f.gap = gap;
  f.ids = ids;
  f.is_test = split.test_mask(ids.size());
  if (weights.empty()) {
    f.weights.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) f.weights[i] = f.is_test[i] ? 1.0 : 0.0;
  } else {
    if (weights.size() != ids.size()) throw DimensionError("weights do not match the sample count");
    f.weights.assign(weights.begin(), weights.end());
  }
  return f;
}

void write_split(std::ostream& out, const SplitFile& split) {
  out << "# sae-split v1 alpha=" << format_real(split.alpha) << " loss=" << format_real(split.loss)
      << " gap=" << format_real(split.gap) << '\n';
  for (std::size_t i = 0; i < split.ids.size(); ++i)
    out << split.ids[i] << '\t' << (split.is_test[i] ? "test" : "train") << '\t'
        << fmt::format("{:.6f}", split.weights[i]) << '\n';
}

SplitFile read_split(std::istream& in, const std::string& source) {
  SplitFile f;
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty split file");
  ++line_no;
  {
    const auto tok = tokens(line);
    if (tok.size() != 6 || tok[0] != "#" || tok[1] != "sae-split" || tok[2] != "v1")
      throw ParseError(source, line_no, "expected '# sae-split v1 alpha=<a> loss=<l> gap=<g>'");
    auto field = [&](std::string_view t, std::string_view key) {
      if (t.substr(0, key.size()) != key) throw ParseError(source, line_no, "expected '" + std::string(key) + "'");
      return parse_real(t.substr(key.size()), source, line_no);
    };
    f.alpha = field(tok[3], "alpha=");
    f.loss = field(tok[4], "loss=");
    f.gap = field(tok[5], "gap=");
  }
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = tokens(line, '\t');
    if (fields.size() != 3) throw ParseError(source, line_no, "expected '<id>\\t<train|test>\\t<weight>'");
    std::string id(fields[0]);
    if (!seen.insert(id).second) throw ParseError(source, line_no, "duplicate sample id '" + id + "'");
    if (fields[1] != "train" && fields[1] != "test") throw ParseError(source, line_no, "role must be train or test");
    f.ids.push_back(std::move(id));
    f.is_test.push_back(fields[1] == "test" ? 1 : 0);
    f.weights.push_back(parse_real(fields[2], source, line_no));
  }
  return f;
}

PredictionSet read_predictions(std::istream& in, const std::string& source) {
  PredictionSet out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto fields = tokens(line, '\t');
    if (fields.size() != 3) throw ParseError(source, line_no, "expected '<id>\\t<truth>\\t<prediction>'");
    const Prediction p{parse_real(fields[1], source, line_no), parse_real(fields[2], source, line_no)};
    if (!out.emplace(std::string(fields[0]), p).second)
      throw ParseError(source, line_no, "duplicate sample id '" + std::string(fields[0]) + "'");
  }
  return out;
}

std::vector<std::string> index_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

}  // namespace sae
