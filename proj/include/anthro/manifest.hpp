// Dataset manifest and measurement-file I/O, plus the provenance helpers
// every output artifact embeds (seed, config, input hash).
#pragma once

#include <string>
#include <vector>

#include "anthro/types.hpp"

namespace anthro {

uint64_t fnv1a64(const void* data, size_t n);
uint64_t fnv1a64_file(const std::string& path);
std::string hex64(uint64_t v);

// {"tool": "anthro", "seed": ..., "config": <json>, "input_hash": ...}
std::string make_provenance(uint64_t seed, const std::string& config_json,
                            const std::string& input_hash);

// Manifest: {"version": 1, "provenance": {...}, "subjects": [...]}, paths
// relative to the manifest file.
void write_manifest(const std::string& path,
                    const std::vector<SubjectRecord>& records,
                    const std::string& provenance_json);
std::vector<SubjectRecord> read_manifest(const std::string& path);

// Joins a path relative to the directory containing `anchor_file`.
std::string resolve_relative(const std::string& anchor_file,
                             const std::string& relative);

// Measured-dimension files: {id, gender, pose, hbd: {name: meters}}.
void save_hbd_json(const std::string& path, const SubjectRecord& rec,
                   const HbdVector& hbd, const std::string& provenance_json);
HbdVector load_hbd_json(const std::string& path);

void save_measurements_csv(
    const std::string& path,
    const std::vector<std::pair<SubjectRecord, HbdVector>>& rows,
    const std::string& provenance_json);

}  // namespace anthro
