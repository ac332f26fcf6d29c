// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "diffmorph/metrics.hpp"
#include "diffmorph/morph.hpp"
#include "diffmorph/rsm.hpp"

namespace diffmorph {

// File formats (CSV, header row required, no quoting):
//
//   embeddings  kind,identity_a,identity_b,image_id,source_ids,f_0,...,f_{d-1}
//               kind is "bona" or "morph"; identity_b and source_ids (';'
//               separated) are empty for bona fide rows.
//   decisions   detector,attack,pair_id,decision
//   scores      kind,distance            kind in {genuine, impostor, morph}
//   premorph    pair,side,f_0,...,f_{d-1} side in {a, b}
//
// Parse errors throw InputError with "<source>:<line>: column '<name>': ...".

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingTable ingest_embeddings(const std::filesystem::path& path);
/// Bona fide rows sorted by (identity, image id), then morphs by image id.
void export_embeddings(const EmbeddingTable& table, std::ostream& out);

std::vector<DecisionRecord> parse_decisions(std::istream& in,
                                            const std::string& source = "<stream>");
std::vector<DecisionRecord> ingest_decisions(const std::filesystem::path& path);
/// Rows sorted by (detector, attack, pair id).
void export_decisions(const std::vector<DecisionRecord>& records, std::ostream& out);

ScoreSet parse_scores(std::istream& in, const std::string& source = "<stream>");
ScoreSet ingest_scores(const std::filesystem::path& path);
void export_scores(const ScoreSet& scores, std::ostream& out);

/// Pre-morphed inputs per pair index: entry.first for side a, .second for side b.
using PremorphTable = std::map<int, std::pair<StateVector, StateVector>>;
PremorphTable ingest_premorph(const std::filesystem::path& path);
void export_premorph(const PremorphTable& table, std::ostream& out);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace diffmorph
