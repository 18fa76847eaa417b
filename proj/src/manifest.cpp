#include "anthro/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace anthro {

using json = nlohmann::json;

uint64_t fnv1a64(const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open for hashing: " + path);
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string make_provenance(uint64_t seed, const std::string& config_json,
                            const std::string& input_hash) {
  json p;
  p["tool"] = "anthro";
  p["seed"] = seed;
  if (!config_json.empty()) p["config"] = json::parse(config_json);
  if (!input_hash.empty()) p["input_hash"] = input_hash;
  return p.dump();
}

void write_manifest(const std::string& path,
                    const std::vector<SubjectRecord>& records,
                    const std::string& provenance_json) {
  json j;
  j["version"] = 1;
  if (!provenance_json.empty()) j["provenance"] = json::parse(provenance_json);
  json subjects = json::array();
  for (const auto& r : records) {
    json s = {{"id", r.id},
              {"gender", to_string(r.gender)},
              {"pose", to_string(r.pose)},
              {"mesh", r.mesh_path},
              {"joints", r.joints_path}};
    if (!r.truth_path.empty()) s["truth"] = r.truth_path;
    subjects.push_back(std::move(s));
  }
  j["subjects"] = std::move(subjects);
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

std::vector<SubjectRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("subjects") || !j["subjects"].is_array())
    throw ParseError(path + ": manifest has no subjects array");
  std::vector<SubjectRecord> records;
  std::vector<std::string> seen;
  for (const auto& s : j["subjects"]) {
    SubjectRecord r;
    r.id = s.at("id").get<std::string>();
    r.gender = gender_from_string(s.at("gender").get<std::string>());
    r.pose = pose_from_string(s.at("pose").get<std::string>());
    r.mesh_path = s.at("mesh").get<std::string>();
    r.joints_path = s.at("joints").get<std::string>();
    if (s.contains("truth")) r.truth_path = s["truth"].get<std::string>();
    if (std::find(seen.begin(), seen.end(), r.id) != seen.end())
      throw DataError(path + ": duplicate subject id " + r.id);
    seen.push_back(r.id);
    records.push_back(std::move(r));
  }
  return records;
}

std::string resolve_relative(const std::string& anchor_file,
                             const std::string& relative) {
  namespace fs = std::filesystem;
  const fs::path rel(relative);
  if (rel.is_absolute()) return relative;
  return (fs::path(anchor_file).parent_path() / rel).string();
}

void save_hbd_json(const std::string& path, const SubjectRecord& rec,
                   const HbdVector& hbd, const std::string& provenance_json) {
  json j;
  j["id"] = rec.id;
  j["gender"] = to_string(rec.gender);
  j["pose"] = to_string(rec.pose);
  json values;
  for (int d = 0; d < kNumDims; ++d) values[dim_names()[d]] = hbd[d];
  j["hbd"] = std::move(values);
  if (!provenance_json.empty()) j["provenance"] = json::parse(provenance_json);
  std::ofstream out(path);
  if (!out) throw Error("cannot write measurement file: " + path);
  out << j.dump(2) << "\n";
}

HbdVector load_hbd_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open measurement file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  const auto& values = j.at("hbd");
  HbdVector hbd;
  for (int d = 0; d < kNumDims; ++d)
    hbd[d] = values.at(dim_names()[d]).get<double>();
  validate_hbd(hbd);
  return hbd;
}

void save_measurements_csv(
    const std::string& path,
    const std::vector<std::pair<SubjectRecord, HbdVector>>& rows,
    const std::string& provenance_json) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write csv: " + path);
  if (!provenance_json.empty()) out << "# provenance " << provenance_json << "\n";
  out << "id,gender,pose";
  for (int d = 0; d < kNumDims; ++d) out << "," << dim_names()[d];
  out << "\n";
  char buf[32];
  for (const auto& [rec, hbd] : rows) {
    out << rec.id << "," << to_string(rec.gender) << "," << to_string(rec.pose);
    for (int d = 0; d < kNumDims; ++d) {
      std::snprintf(buf, sizeof(buf), "%.9f", hbd[d]);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace anthro
