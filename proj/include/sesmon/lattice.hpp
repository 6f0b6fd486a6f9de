#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sesmon {

// Index of an element in a validated Lattice. Levels from different lattices
// must not be mixed.
struct Level {
  std::uint8_t index = 0;

  friend auto operator<=>(const Level&, const Level&) = default;
};

class LatticeError : public std::runtime_error {
 public:
  enum class Kind { Empty, UnknownElement, DuplicateElement, NotAPartialOrder, NotALattice };

  LatticeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class DownSet;

// A finite lattice of security levels. Built once by validate(); every query
// afterwards is a table lookup.
class Lattice {
 public:
  static constexpr std::size_t kMaxElements = 24;

  // `order` lists pairs (lower, upper); the reflexive-transitive closure is taken.
  static Lattice validate(const std::vector<std::string>& elements,
                          const std::vector<std::pair<std::string, std::string>>& order);

  // The chain bot < top.
  static Lattice twoPoint();

  std::size_t size() const { return names_.size(); }
  const std::string& name(Level l) const { return names_.at(l.index); }
  const std::vector<std::string>& names() const { return names_; }
  Level level(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<Level> levels() const;

  Level bottom() const { return bottom_; }
  Level top() const { return top_; }

  bool leq(Level a, Level b) const { return leq_[a.index * size() + b.index]; }
  Level join(Level a, Level b) const { return {join_[a.index * size() + b.index]}; }
  Level meet(Level a, Level b) const { return {meet_[a.index * size() + b.index]}; }

  // Every downward-closed subset, each exactly once, ordered by cardinality.
  std::vector<DownSet> downSets() const;

  // Builds the downward closure of the named levels.
  DownSet downClosure(const std::vector<Level>& generators) const;

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.names_ == b.names_ && a.leq_ == b.leq_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<bool> leq_;
  std::vector<std::uint8_t> join_;
  std::vector<std::uint8_t> meet_;
  Level bottom_;
  Level top_;
};

// Downward-closed set of levels: the levels an observer can see.
class DownSet {
 public:
  DownSet() = default;

  // Throws std::invalid_argument if `mask` is not downward closed in `lat`.
  DownSet(const Lattice& lat, std::uint32_t mask);

  bool contains(Level l) const { return (mask_ >> l.index) & 1u; }
  bool empty() const { return mask_ == 0; }
  std::uint32_t mask() const { return mask_; }
  std::vector<Level> members() const;

  // Renders as {bot,l} in lattice order.
  std::string toString(const Lattice& lat) const;

  friend auto operator<=>(const DownSet&, const DownSet&) = default;

 private:
  std::uint32_t mask_ = 0;
};

bool isDownwardClosed(const Lattice& lat, std::uint32_t mask);

}  // namespace sesmon
