// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "diffmorph/errors.hpp"

namespace diffmorph {
namespace {

struct CsvRow {
  int line = 0;
  std::vector<std::string> cells;
};

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::vector<std::string> header() {
    CsvRow row;
    if (!next(row)) fail(1, "", "missing header row");
    header_ = row.cells;
    return header_;
  }

  bool next(CsvRow& row) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      if (text.empty()) continue;
      row.line = line_;
      row.cells.clear();
      std::size_t start = 0;
      for (;;) {
        const auto pos = text.find(',', start);
        row.cells.push_back(text.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      if (!header_.empty() && row.cells.size() != header_.size()) {
        fail(line_, "", "expected " + std::to_string(header_.size()) + " columns, found " +
                            std::to_string(row.cells.size()));
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(int line, const std::string& column, const std::string& msg) const {
    std::string where = source_ + ":" + std::to_string(line) + ": ";
    if (!column.empty()) where += "column '" + column + "': ";
    throw InputError(where + msg);
  }

  double number(const CsvRow& row, std::size_t col) const {
    const std::string& s = row.cells[col];
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
      fail(row.line, header_[col], "'" + s + "' is not a number");
    }
    if (!std::isfinite(v)) fail(row.line, header_[col], "value must be finite");
    return v;
  }

  int integer(const CsvRow& row, std::size_t col) const {
    const std::string& s = row.cells[col];
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
      fail(row.line, header_[col], "'" + s + "' is not an integer");
    }
    return v;
  }

  const std::string& column(std::size_t col) const { return header_[col]; }
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::vector<std::string> header_;
  int line_ = 0;
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

void expect_header(CsvReader& r, const std::vector<std::string>& expected) {
  const auto h = r.header();
  if (h != expected) {
    std::string want;
    for (const auto& c : expected) want += (want.empty() ? "" : ",") + c;
    r.fail(1, "", "header must be '" + want + "'");
  }
}

// Validates the f_0..f_{d-1} tail of a header starting at `first`.
int feature_columns(CsvReader& r, const std::vector<std::string>& h, std::size_t first) {
  if (h.size() <= first) r.fail(1, "", "no feature columns f_0..f_{d-1}");
  for (std::size_t c = first; c < h.size(); ++c) {
    if (h[c] != "f_" + std::to_string(c - first)) {
      r.fail(1, h[c], "expected 'f_" + std::to_string(c - first) + "'");
    }
  }
  return static_cast<int>(h.size() - first);
}

Eigen::VectorXd features(const CsvReader& r, const CsvRow& row, std::size_t first) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(row.cells.size() - first));
  for (std::size_t c = first; c < row.cells.size(); ++c) {
    f[static_cast<Eigen::Index>(c - first)] = r.number(row, c);
  }
  return f;
}

void write_features(std::ostream& out, const Eigen::VectorXd& f) {
  for (Eigen::Index i = 0; i < f.size(); ++i) out << ',' << format_double(f[i]);
}

std::vector<std::string> split_sources(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(';', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source) {
  CsvReader r(in, source);
  const auto h = r.header();
  const std::vector<std::string> fixed = {"kind", "identity_a", "identity_b", "image_id",
                                          "source_ids"};
  for (std::size_t c = 0; c < fixed.size(); ++c) {
    if (c >= h.size() || h[c] != fixed[c]) {
      r.fail(1, c < h.size() ? h[c] : "", "expected column '" + fixed[c] + "'");
    }
  }
  feature_columns(r, h, fixed.size());

  // Morph rows may precede the identities they reference; add them last.
  EmbeddingTable table;
  std::vector<std::pair<int, MorphImage>> morphs;
  CsvRow row;
  while (r.next(row)) {
    const auto& kind = row.cells[0];
    const auto& ida = row.cells[1];
    const auto& idb = row.cells[2];
    const auto& image = row.cells[3];
    if (image.empty()) r.fail(row.line, "image_id", "must not be empty");
    if (ida.empty()) r.fail(row.line, "identity_a", "must not be empty");
    Eigen::VectorXd f = features(r, row, fixed.size());
    try {
      if (kind == "bona") {
        if (!idb.empty()) r.fail(row.line, "identity_b", "must be empty for bona fide rows");
        if (!row.cells[4].empty()) r.fail(row.line, "source_ids", "must be empty for bona fide rows");
        table.add_bona_fide({ida, image, std::move(f)});
      } else if (kind == "morph") {
        if (idb.empty()) r.fail(row.line, "identity_b", "required for morph rows");
        morphs.emplace_back(row.line,
                            MorphImage{image, ida, idb, split_sources(row.cells[4]), std::move(f)});
      } else {
        r.fail(row.line, "kind", "'" + kind + "' is not 'bona' or 'morph'");
      }
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.rfind(source + ":", 0) == 0) throw;
      r.fail(row.line, "image_id", msg);
    }
  }
  for (auto& [line, m] : morphs) {
    try {
      table.add_morph(std::move(m));
    } catch (const InputError& e) {
      r.fail(line, "identity_a", e.what());
    }
  }
  return table;
}

EmbeddingTable ingest_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_embeddings(in, path.string());
}

void export_embeddings(const EmbeddingTable& table, std::ostream& out) {
  out << "kind,identity_a,identity_b,image_id,source_ids";
  for (int i = 0; i < table.dim(); ++i) out << ",f_" << i;
  out << '\n';
  for (const auto& [identity, imgs] : table.bona_fide()) {
    std::vector<const BonaFideImage*> sorted;
    for (const auto& img : imgs) sorted.push_back(&img);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->image_id < b->image_id; });
    for (const auto* img : sorted) {
      out << "bona," << identity << ",," << img->image_id << ',';
      write_features(out, img->features);
      out << '\n';
    }
  }
  std::vector<const MorphImage*> morphs;
  for (const auto& m : table.morphs()) morphs.push_back(&m);
  std::sort(morphs.begin(), morphs.end(),
            [](const auto* a, const auto* b) { return a->image_id < b->image_id; });
  for (const auto* m : morphs) {
    out << "morph," << m->identity_a << ',' << m->identity_b << ',' << m->image_id << ',';
    for (std::size_t i = 0; i < m->source_ids.size(); ++i) {
      out << (i ? ";" : "") << m->source_ids[i];
    }
    write_features(out, m->features);
    out << '\n';
  }
}

std::vector<DecisionRecord> parse_decisions(std::istream& in, const std::string& source) {
  CsvReader r(in, source);
  expect_header(r, {"detector", "attack", "pair_id", "decision"});
  std::map<std::pair<std::string, std::string>, DecisionRecord> records;
  CsvRow row;
  while (r.next(row)) {
    for (std::size_t c = 0; c < 3; ++c) {
      if (row.cells[c].empty()) r.fail(row.line, r.column(c), "must not be empty");
    }
    const int decision = r.integer(row, 3);
    auto& rec = records[{row.cells[0], row.cells[1]}];
    rec.detector = row.cells[0];
    rec.attack = row.cells[1];
    try {
      rec.add(row.cells[2], decision);
    } catch (const InputError& e) {
      r.fail(row.line, decision == 0 || decision == 1 ? "pair_id" : "decision", e.what());
    }
  }
  std::vector<DecisionRecord> out;
  for (auto& [key, rec] : records) out.push_back(std::move(rec));
  return out;
}

std::vector<DecisionRecord> ingest_decisions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_decisions(in, path.string());
}

void export_decisions(const std::vector<DecisionRecord>& records, std::ostream& out) {
  std::vector<const DecisionRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::tie(a->detector, a->attack) < std::tie(b->detector, b->attack);
  });
  out << "detector,attack,pair_id,decision\n";
  for (const auto* r : sorted) {
    for (const auto& [pair, d] : r->decisions) {
      out << r->detector << ',' << r->attack << ',' << pair << ',' << d << '\n';
    }
  }
}

ScoreSet parse_scores(std::istream& in, const std::string& source) {
  CsvReader r(in, source);
  expect_header(r, {"kind", "distance"});
  ScoreSet s;
  CsvRow row;
  while (r.next(row)) {
    const double d = r.number(row, 1);
    if (d < 0.0) r.fail(row.line, "distance", "must be nonnegative");
    const auto& kind = row.cells[0];
    if (kind == "genuine") {
      s.genuine.push_back(d);
    } else if (kind == "impostor") {
      s.impostor.push_back(d);
    } else if (kind == "morph") {
      s.morph.push_back(d);
    } else {
      r.fail(row.line, "kind", "'" + kind + "' is not genuine, impostor or morph");
    }
  }
  return s;
}

ScoreSet ingest_scores(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_scores(in, path.string());
}

void export_scores(const ScoreSet& scores, std::ostream& out) {
  out << "kind,distance\n";
  for (double d : scores.genuine) out << "genuine," << format_double(d) << '\n';
  for (double d : scores.impostor) out << "impostor," << format_double(d) << '\n';
  for (double d : scores.morph) out << "morph," << format_double(d) << '\n';
}

PremorphTable ingest_premorph(const std::filesystem::path& path) {
  auto in = open_input(path);
  CsvReader r(in, path.string());
  const auto h = r.header();
  if (h.size() < 2 || h[0] != "pair" || h[1] != "side") {
    r.fail(1, "", "header must start with 'pair,side'");
  }
  const int dim = feature_columns(r, h, 2);
  PremorphTable table;
  std::set<std::pair<int, std::string>> seen;
  CsvRow row;
  while (r.next(row)) {
    const int pair = r.integer(row, 0);
    const auto& side = row.cells[1];
    if (side != "a" && side != "b") r.fail(row.line, "side", "must be 'a' or 'b'");
    if (!seen.emplace(pair, side).second) {
      r.fail(row.line, "pair", "duplicate entry for pair " + std::to_string(pair) + side);
    }
    auto& entry = table[pair];
    (side == "a" ? entry.first : entry.second) = features(r, row, 2);
  }
  for (const auto& [pair, entry] : table) {
    if (entry.first.size() != dim || entry.second.size() != dim) {
      throw InputError(path.string() + ": pair " + std::to_string(pair) +
                       " needs both an 'a' and a 'b' row");
    }
  }
  return table;
}

void export_premorph(const PremorphTable& table, std::ostream& out) {
  const auto dim = table.empty() ? 0 : table.begin()->second.first.size();
  out << "pair,side";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",f_" << i;
  out << '\n';
  for (const auto& [pair, entry] : table) {
    out << pair << ",a";
    write_features(out, entry.first);
    out << '\n' << pair << ",b";
    write_features(out, entry.second);
    out << '\n';
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw DomainError("cannot format number");
  return std::string(buf, ptr);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at '" + path.string() + "'");
  }
}

}  // namespace diffmorph
