#include "spikekg/kg.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spikekg/error.hpp"
#include "zachary_data.hpp"

namespace spikekg {

Vocabulary::Vocabulary(std::vector<std::string> labels) {
  for (auto& l : labels) intern(l);
}

std::uint32_t Vocabulary::intern(std::string_view label) {
  if (auto id = find(label)) return *id;
  if (frozen_) throw VocabError("unknown label '" + std::string(label) + "'");
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::at(std::string_view label) const {
  if (auto id = find(label)) return *id;
  throw VocabError("unknown label '" + std::string(label) + "'");
}

const std::string& Vocabulary::label(std::uint32_t id) const {
  if (id >= labels_.size()) throw VocabError("id " + std::to_string(id) + " out of range");
  return labels_[id];
}

std::uint64_t FilterIndex::pair_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

// 24 bits per entity, 16 bits per relation covers every benchmark we ship.
std::uint64_t FilterIndex::key(const Triple& t) {
  return (static_cast<std::uint64_t>(t.subject) << 40) |
         (static_cast<std::uint64_t>(t.predicate) << 24) | t.object;
}

void FilterIndex::insert(const Triple& t) {
  if (t.subject >= (1u << 24) || t.object >= (1u << 24) || t.predicate >= (1u << 16))
    throw DimensionError("filter index supports at most 2^24 entities and 2^16 relations");
  if (!keys_.insert(key(t)).second) return;
  by_subject_[pair_key(t.subject, t.predicate)].push_back(t.object);
  by_object_[pair_key(t.predicate, t.object)].push_back(t.subject);
}

bool FilterIndex::contains(const Triple& t) const { return keys_.contains(key(t)); }

std::span<const EntityId> FilterIndex::objects(EntityId s, RelationId p) const {
  auto it = by_subject_.find(pair_key(s, p));
  if (it == by_subject_.end()) return {};
  return it->second;
}

std::span<const EntityId> FilterIndex::subjects(RelationId p, EntityId o) const {
  auto it = by_object_.find(pair_key(p, o));
  if (it == by_object_.end()) return {};
  return it->second;
}

const std::vector<Triple>& KnowledgeGraph::split(std::string_view which) const {
  if (which == "train") return train;
  if (which == "valid") return valid;
  if (which == "test") return test;
  throw ConfigError("unknown split '" + std::string(which) + "' (expected train, valid or test)");
}

std::vector<Triple> parse_tsv(std::string_view text, Vocabulary& entities, Vocabulary& relations,
                              const std::string& source) {
  std::vector<Triple> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto n = static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t')) + 1;
    if (n != 3)
      throw ParseError(source, line_no, "expected 3 tab-separated fields, got " + std::to_string(n));
    const auto tab1 = line.find('\t');
    const auto tab2 = line.find('\t', tab1 + 1);
    const std::string_view fields[3] = {line.substr(0, tab1), line.substr(tab1 + 1, tab2 - tab1 - 1),
                                        line.substr(tab2 + 1)};
    Triple t;
    try {
      t.subject = entities.intern(fields[0]);
      t.predicate = relations.intern(fields[1]);
      t.object = entities.intern(fields[2]);
    } catch (const VocabError& e) {
      throw VocabError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(t);
  }
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Triple> dedupe(std::vector<Triple> triples) {
  std::unordered_set<std::uint64_t> seen;
  std::vector<Triple> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    const std::uint64_t k = (static_cast<std::uint64_t>(t.subject) << 40) |
                            (static_cast<std::uint64_t>(t.predicate) << 24) | t.object;
    if (seen.insert(k).second) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<Triple> load_tsv(const std::filesystem::path& path, Vocabulary& entities,
                             Vocabulary& relations) {
  return parse_tsv(read_file(path), entities, relations, path.string());
}

void write_tsv(const std::filesystem::path& path, std::span<const Triple> triples,
               const Vocabulary& entities, const Vocabulary& relations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& t : triples) {
    out << entities.label(t.subject) << '\t' << relations.label(t.predicate) << '\t'
        << entities.label(t.object) << '\n';
  }
}

FilterIndex build_filter_index(const KnowledgeGraph& kg) {
  FilterIndex index;
  for (const auto* split : {&kg.train, &kg.valid, &kg.test})
    for (const auto& t : *split) index.insert(t);
  return index;
}

KnowledgeGraph load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("dataset directory '" + dir.string() + "' does not exist");
  KnowledgeGraph kg;
  kg.name = dir.filename().string();
  kg.train = dedupe(load_tsv(dir / "train.txt", kg.entities, kg.relations));
  kg.valid = dedupe(load_tsv(dir / "valid.txt", kg.entities, kg.relations));
  kg.test = dedupe(load_tsv(dir / "test.txt", kg.entities, kg.relations));
  kg.entities.freeze();
  kg.relations.freeze();
  kg.filter = build_filter_index(kg);
  return kg;
}

std::vector<std::pair<int, int>> zachary_edges() {
  std::vector<std::pair<int, int>> edges;
  std::istringstream in{std::string(detail::kZacharyEdges)};
  int a = 0, b = 0;
  while (in >> a >> b) edges.emplace_back(a, b);
  return edges;
}

std::vector<int> zachary_groups() {
  std::vector<int> groups(34, 0);
  std::istringstream in{std::string(detail::kZacharyGroups)};
  int member = 0, group = 0;
  while (in >> member >> group) groups.at(member - 1) = group;
  return groups;
}

KnowledgeGraph load_zachary() {
  KnowledgeGraph kg;
  kg.name = "zachary";
  for (int m = 1; m <= 34; ++m) kg.entities.intern(std::to_string(m));
  const auto interact = kg.relations.intern("interact");
  for (auto [a, b] : zachary_edges()) {
    const auto ea = static_cast<EntityId>(a - 1);
    const auto eb = static_cast<EntityId>(b - 1);
    kg.train.push_back({ea, interact, eb});
    kg.train.push_back({eb, interact, ea});
  }
  for (int g : zachary_groups()) kg.groups.push_back(static_cast<std::uint32_t>(g));
  kg.entities.freeze();
  kg.relations.freeze();
  kg.filter = build_filter_index(kg);
  return kg;
}

std::filesystem::path data_root() {
  if (const char* env = std::getenv("SPIKEKG_DATA")) return env;
#ifdef SPIKEKG_DATA_DIR
  return SPIKEKG_DATA_DIR;
#else
  return "data";
#endif
}

KnowledgeGraph resolve_dataset(const std::string& name_or_path) {
  if (name_or_path == "zachary") return load_zachary();
  std::filesystem::path p(name_or_path);
  if (std::filesystem::is_directory(p)) return load_dataset(p);
  auto builtin = data_root() / name_or_path;
  if (std::filesystem::is_directory(builtin)) {
    auto kg = load_dataset(builtin);
    kg.name = name_or_path;
    return kg;
  }
  throw IoError("dataset '" + name_or_path + "' is neither a directory nor a bundled dataset under '" +
                data_root().string() + "'");
}

}  // namespace spikekg
