#pragma once

// Mean Opinion Rank studies: randomized presentation manifests and rank
// aggregation.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rwsr/codec.hpp"
#include "rwsr/error.hpp"
#include "rwsr/random.hpp"

namespace rwsr {

struct MethodSource {
  std::string name;
  std::filesystem::path dir;
};

struct Candidate {
  std::string code;    // presentation label, "A", "B", ...
  std::string method;  // real method name
  std::string file;    // path as given by the method directory

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct StudyItem {
  std::string image_id;
  std::vector<Candidate> candidates;  // presentation order

  friend bool operator==(const StudyItem&, const StudyItem&) = default;
};

struct StudyManifest {
  std::string study_id;
  std::vector<std::string> methods;
  std::vector<StudyItem> items;
  std::uint64_t shuffle_seed = 0;

  friend bool operator==(const StudyManifest&, const StudyManifest&) = default;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["study_id"] = study_id;
    j["shuffle_seed"] = shuffle_seed;
    j["methods"] = methods;
    j["items"] = nlohmann::json::array();
    for (const auto& it : items) {
      nlohmann::json cj = nlohmann::json::array();
      for (const auto& c : it.candidates) {
        cj.push_back({{"code", c.code}, {"method", c.method}, {"file", c.file}});
      }
      j["items"].push_back({{"image_id", it.image_id}, {"candidates", std::move(cj)}});
    }
    return j;
  }

  std::string serialize() const { return to_json().dump(2) + "\n"; }

  static StudyManifest from_json(const nlohmann::json& j) {
    StudyManifest m;
    try {
      m.study_id = j.at("study_id").get<std::string>();
      m.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
      m.methods = j.at("methods").get<std::vector<std::string>>();
      for (const auto& ij : j.at("items")) {
        StudyItem it;
        it.image_id = ij.at("image_id").get<std::string>();
        for (const auto& cj : ij.at("candidates")) {
          it.candidates.push_back({cj.at("code").get<std::string>(),
                                   cj.at("method").get<std::string>(),
                                   cj.at("file").get<std::string>()});
        }
        m.items.push_back(std::move(it));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("study manifest: ") + e.what());
    }
    return m;
  }
};

inline std::string presentation_code(std::size_t i) {
  if (i >= 26) throw ArgumentError("MOR study supports at most 26 methods");
  return std::string(1, static_cast<char>('A' + i));
}

// File in `dir` whose stem equals image_id (first match in sorted order).
inline std::optional<std::filesystem::path> find_by_stem(const std::filesystem::path& dir,
                                                         const std::string& image_id) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return std::nullopt;
  std::vector<std::filesystem::path> hits;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().stem().string() == image_id) hits.push_back(e.path());
  }
  if (hits.empty()) return std::nullopt;
  std::sort(hits.begin(), hits.end());
  return hits.front();
}

// Fisher-Yates per image, seeded from hash(seed, image_id) so each item's
// order is independent of the others.
inline StudyManifest build_study(const std::vector<std::string>& image_ids,
                                 const std::vector<MethodSource>& methods, std::uint64_t seed,
                                 std::string study_id = {}) {
  if (methods.empty()) throw ArgumentError("build_study: no methods");
  if (methods.size() > 26) throw ArgumentError("build_study: at most 26 methods");
  StudyManifest m;
  m.study_id = study_id.empty() ? "study-" + std::to_string(seed) : std::move(study_id);
  m.shuffle_seed = seed;
  for (const auto& ms : methods) m.methods.push_back(ms.name);
  for (const auto& id : image_ids) {
    StudyItem item{id, {}};
    for (const auto& ms : methods) {
      const auto f = find_by_stem(ms.dir, id);
      if (!f) {
        throw IoError("build_study: no file for image '" + id + "' in method '" + ms.name +
                      "' (" + ms.dir.string() + ")");
      }
      item.candidates.push_back({"", ms.name, f->generic_string()});
    }
    Rng rng(StableHash().u64(seed).bytes(id).digest());
    for (std::size_t i = item.candidates.size(); i > 1; --i) {
      std::swap(item.candidates[i - 1], item.candidates[rng.index(i)]);
    }
    for (std::size_t i = 0; i < item.candidates.size(); ++i) {
      item.candidates[i].code = presentation_code(i);
    }
    m.items.push_back(std::move(item));
  }
  return m;
}

// ---------------------------------------------------------------- ranks

struct RankRecord {
  std::string participant_id;
  std::string image_id;
  std::map<std::string, int> ranks;  // method -> rank, 1 = best
};

struct MorResult {
  std::map<std::string, double> mor;
  std::size_t record_count = 0;
};

inline std::string record_location(const RankRecord& r) {
  return "participant '" + r.participant_id + "', image '" + r.image_id + "'";
}

inline void validate_record(const RankRecord& r, const std::vector<std::string>& methods) {
  const std::size_t m = methods.size();
  for (const auto& name : methods) {
    if (!r.ranks.contains(name)) {
      throw ValidationError("incomplete ranking for " + record_location(r) + ": method '" + name +
                            "' has no rank");
    }
  }
  if (r.ranks.size() != m) {
    for (const auto& [name, rank] : r.ranks) {
      if (std::find(methods.begin(), methods.end(), name) == methods.end()) {
        throw ValidationError("unknown method '" + name + "' for " + record_location(r));
      }
    }
  }
  std::vector<bool> seen(m + 1, false);
  for (const auto& [name, rank] : r.ranks) {
    if (rank < 1 || static_cast<std::size_t>(rank) > m) {
      throw ValidationError("rank " + std::to_string(rank) + " out of range 1.." +
                            std::to_string(m) + " for " + record_location(r));
    }
    if (seen[rank]) {
      throw ValidationError("tied rank " + std::to_string(rank) + " for " + record_location(r));
    }
    seen[rank] = true;
  }
}

// MOR(method) = mean rank over all records. Integer sums, one division.
inline MorResult aggregate_mor(const std::vector<RankRecord>& records,
                               const std::vector<std::string>& methods) {
  if (methods.empty()) throw ArgumentError("aggregate_mor: no methods");
  std::set<std::pair<std::string, std::string>> keys;
  std::map<std::string, long long> sums;
  for (const auto& m : methods) sums[m] = 0;
  for (const auto& r : records) {
    validate_record(r, methods);
    if (!keys.emplace(r.participant_id, r.image_id).second) {
      throw ValidationError("duplicate ranking for " + record_location(r));
    }
    for (const auto& [name, rank] : r.ranks) sums[name] += rank;
  }
  if (records.empty()) throw ValidationError("aggregate_mor: no rank records");
  MorResult res;
  res.record_count = records.size();
  for (const auto& m : methods) {
    res.mor[m] = static_cast<double>(sums[m]) / static_cast<double>(records.size());
  }
  return res;
}

// ---------------------------------------------------------------- CSV

namespace detail {

// RFC 4180-style line split: quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(const std::string& line, int lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("rank CSV line " + std::to_string(lineno) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace detail

inline std::string csv_escape(const std::string& s) { return detail::csv_field(s); }

struct RankTable {
  std::vector<RankRecord> records;  // in first-appearance order
  std::vector<std::string> methods;  // sorted unique
};

// header `participant,image,method,rank`; one row per (participant, image, method).
inline RankTable parse_rank_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::set<std::string> methods;
  RankTable t;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line, lineno);
    if (!header) {
      if (f != std::vector<std::string>{"participant", "image", "method", "rank"}) {
        throw ParseError("rank CSV line " + std::to_string(lineno) +
                         ": expected header 'participant,image,method,rank'");
      }
      header = true;
      continue;
    }
    if (f.size() != 4) {
      throw ParseError("rank CSV line " + std::to_string(lineno) + ": expected 4 fields, got " +
                       std::to_string(f.size()));
    }
    int rank = 0;
    try {
      std::size_t used = 0;
      rank = std::stoi(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument(f[3]);
    } catch (const std::exception&) {
      throw ParseError("rank CSV line " + std::to_string(lineno) + ": rank '" + f[3] +
                       "' is not an integer");
    }
    const auto key = std::make_pair(f[0], f[1]);
    auto [it, fresh] = index.emplace(key, t.records.size());
    if (fresh) t.records.push_back({f[0], f[1], {}});
    auto& rec = t.records[it->second];
    if (!rec.ranks.emplace(f[2], rank).second) {
      throw ValidationError("rank CSV line " + std::to_string(lineno) + ": method '" + f[2] +
                            "' ranked twice for " + record_location(rec));
    }
    methods.insert(f[2]);
  }
  if (!header) throw ParseError("rank CSV: missing header");
  t.methods.assign(methods.begin(), methods.end());
  return t;
}

inline std::string format_rank_csv(const std::vector<RankRecord>& records) {
  std::string out = "participant,image,method,rank\n";
  for (const auto& r : records)
    for (const auto& [m, rank] : r.ranks)
      out += detail::csv_field(r.participant_id) + "," + detail::csv_field(r.image_id) + "," +
             detail::csv_field(m) + "," + std::to_string(rank) + "\n";
  return out;
}

}  // namespace rwsr
