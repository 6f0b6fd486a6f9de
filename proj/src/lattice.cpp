#include "sesmon/lattice.hpp"

#include <algorithm>
#include <optional>

namespace sesmon {

namespace {

std::optional<std::size_t> indexOf(const std::vector<std::string>& names, std::string_view n) {
  auto it = std::find(names.begin(), names.end(), n);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

Lattice Lattice::validate(const std::vector<std::string>& elements,
                          const std::vector<std::pair<std::string, std::string>>& order) {
  if (elements.empty()) throw LatticeError(LatticeError::Kind::Empty, "lattice has no elements");
  if (elements.size() > kMaxElements) {
    throw LatticeError(LatticeError::Kind::NotALattice, "lattice has too many elements");
  }
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (std::size_t j = i + 1; j < elements.size(); ++j) {
      if (elements[i] == elements[j]) {
        throw LatticeError(LatticeError::Kind::DuplicateElement,
                           "duplicate lattice element '" + elements[i] + "'");
      }
    }
  }

  Lattice lat;
  lat.names_ = elements;
  const std::size_t n = elements.size();
  std::vector<bool> le(n * n, false);
  for (std::size_t i = 0; i < n; ++i) le[i * n + i] = true;
  for (const auto& [lo, hi] : order) {
    auto a = indexOf(elements, lo);
    auto b = indexOf(elements, hi);
    if (!a) throw LatticeError(LatticeError::Kind::UnknownElement, "unknown level '" + lo + "'");
    if (!b) throw LatticeError(LatticeError::Kind::UnknownElement, "unknown level '" + hi + "'");
    le[*a * n + *b] = true;
  }
  // Warshall closure.
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (le[i * n + k])
        for (std::size_t j = 0; j < n; ++j)
          if (le[k * n + j]) le[i * n + j] = true;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (le[i * n + j] && le[j * n + i]) {
        throw LatticeError(LatticeError::Kind::NotAPartialOrder,
                           "order has a cycle between '" + elements[i] + "' and '" + elements[j] + "'");
      }

  lat.leq_ = le;
  lat.join_.assign(n * n, 0);
  lat.meet_.assign(n * n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      std::optional<std::size_t> lub, glb;
      for (std::size_t c = 0; c < n; ++c) {
        if (le[a * n + c] && le[b * n + c]) {
          bool least = true;
          for (std::size_t d = 0; d < n && least; ++d)
            if (le[a * n + d] && le[b * n + d] && !le[c * n + d]) least = false;
          if (least) lub = c;
        }
        if (le[c * n + a] && le[c * n + b]) {
          bool greatest = true;
          for (std::size_t d = 0; d < n && greatest; ++d)
            if (le[d * n + a] && le[d * n + b] && !le[d * n + c]) greatest = false;
          if (greatest) glb = c;
        }
      }
      if (!lub || !glb) {
        throw LatticeError(LatticeError::Kind::NotALattice, "'" + elements[a] + "' and '" +
                                                                elements[b] +
                                                                "' lack a unique join or meet");
      }
      lat.join_[a * n + b] = static_cast<std::uint8_t>(*lub);
      lat.meet_[a * n + b] = static_cast<std::uint8_t>(*glb);
    }
  }

  std::uint8_t bot = 0, top = 0;
  for (std::size_t i = 1; i < n; ++i) {
    bot = lat.meet_[bot * n + i];
    top = lat.join_[top * n + i];
  }
  lat.bottom_ = Level{bot};
  lat.top_ = Level{top};
  return lat;
}

Lattice Lattice::twoPoint() { return validate({"bot", "top"}, {{"bot", "top"}}); }

Level Lattice::level(std::string_view name) const {
  auto i = indexOf(names_, name);
  if (!i) throw LatticeError(LatticeError::Kind::UnknownElement, "unknown level '" + std::string(name) + "'");
  return Level{static_cast<std::uint8_t>(*i)};
}

bool Lattice::contains(std::string_view name) const { return indexOf(names_, name).has_value(); }

std::vector<Level> Lattice::levels() const {
  std::vector<Level> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(Level{static_cast<std::uint8_t>(i)});
  return out;
}

bool isDownwardClosed(const Lattice& lat, std::uint32_t mask) {
  for (Level hi : lat.levels()) {
    if (!((mask >> hi.index) & 1u)) continue;
    for (Level lo : lat.levels())
      if (lat.leq(lo, hi) && !((mask >> lo.index) & 1u)) return false;
  }
  return true;
}

std::vector<DownSet> Lattice::downSets() const {
  std::vector<DownSet> out;
  const std::uint32_t limit = 1u << size();
  for (std::uint32_t m = 0; m < limit; ++m)
    if (isDownwardClosed(*this, m)) out.emplace_back(*this, m);
  std::stable_sort(out.begin(), out.end(), [](const DownSet& a, const DownSet& b) {
    return __builtin_popcount(a.mask()) < __builtin_popcount(b.mask());
  });
  return out;
}

DownSet Lattice::downClosure(const std::vector<Level>& generators) const {
  std::uint32_t mask = 0;
  for (Level g : generators)
    for (Level l : levels())
      if (leq(l, g)) mask |= 1u << l.index;
  return DownSet(*this, mask);
}

DownSet::DownSet(const Lattice& lat, std::uint32_t mask) : mask_(mask) {
  if (!isDownwardClosed(lat, mask)) throw std::invalid_argument("level set is not downward closed");
}

std::vector<Level> DownSet::members() const {
  std::vector<Level> out;
  for (std::uint8_t i = 0; i < 32; ++i)
    if ((mask_ >> i) & 1u) out.push_back(Level{i});
  return out;
}

std::string DownSet::toString(const Lattice& lat) const {
  std::string s = "{";
  bool first = true;
  for (Level l : members()) {
    if (!first) s += ",";
    s += lat.name(l);
    first = false;
  }
  return s + "}";
}

}  // namespace sesmon
