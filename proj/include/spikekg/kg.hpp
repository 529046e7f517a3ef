#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace spikekg {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId subject = 0;
  RelationId predicate = 0;
  EntityId object = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

enum class Side { subject, object };

// Dense label <-> id map. Ids are assigned in first-seen order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> labels);

  // Returns the id of `label`, interning it unless the vocabulary is frozen.
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  std::uint32_t at(std::string_view label) const;  // throws VocabError
  const std::string& label(std::uint32_t id) const;

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  bool frozen_ = false;
};

// Set of known-true triples, plus per-(s,p) and per-(p,o) completion lists
// so that ranking can skip filtered candidates without probing every entity.
class FilterIndex {
 public:
  FilterIndex() = default;

  void insert(const Triple& t);
  bool contains(const Triple& t) const;
  std::size_t size() const { return keys_.size(); }

  // Objects o with (s,p,o) known true.
  std::span<const EntityId> objects(EntityId s, RelationId p) const;
  // Subjects s with (s,p,o) known true.
  std::span<const EntityId> subjects(RelationId p, EntityId o) const;

 private:
  static std::uint64_t key(const Triple& t);
  static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b);

  std::unordered_set<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> by_subject_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> by_object_;
};

struct KnowledgeGraph {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  FilterIndex filter;

  // Ground-truth community per entity (Zachary only; empty otherwise).
  std::vector<std::uint32_t> groups;
  std::string name;

  std::size_t num_entities() const { return entities.size(); }
  std::size_t num_relations() const { return relations.size(); }
  std::size_t num_triples() const { return train.size() + valid.size() + test.size(); }
  const std::vector<Triple>& split(std::string_view which) const;
};

// Reads tab-separated (subject, predicate, object) label triples.
std::vector<Triple> load_tsv(const std::filesystem::path& path, Vocabulary& entities,
                             Vocabulary& relations);
std::vector<Triple> parse_tsv(std::string_view text, Vocabulary& entities, Vocabulary& relations,
                              const std::string& source = "<memory>");
void write_tsv(const std::filesystem::path& path, std::span<const Triple> triples,
               const Vocabulary& entities, const Vocabulary& relations);

FilterIndex build_filter_index(const KnowledgeGraph& kg);

// Loads `train.txt`, `valid.txt`, `test.txt` from `dir`; the vocabulary is
// the union of all three. Duplicates within a split are dropped.
KnowledgeGraph load_dataset(const std::filesystem::path& dir);

// Zachary karate club: 34 members, one symmetric `interact` relation, both
// directions of each of the 78 edges in `train`. Entity labels are "1".."34".
KnowledgeGraph load_zachary();

// Raw bundled data, for callers that want the undirected edge list.
std::vector<std::pair<int, int>> zachary_edges();
std::vector<int> zachary_groups();  // index i -> group of member i+1, in {1, 34}

// Resolves builtin dataset names ("zachary", "umls", "kinships") or a path.
KnowledgeGraph resolve_dataset(const std::string& name_or_path);
std::filesystem::path data_root();

}  // namespace spikekg
