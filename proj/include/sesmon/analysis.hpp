#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sesmon/monitor.hpp"

namespace sesmon {

// ---------------------------------------------------------------------------
// Q-set universe
// ---------------------------------------------------------------------------

// All monotone queues over `lanes` whose total length is at most `bound`,
// shortest first.
std::vector<Queue> monotoneQueues(const std::vector<Content>& alphabet, const std::vector<Queue::Lane>& lanes,
                                  std::size_t bound, const Lattice& lat);

class QSetUniverse {
 public:
  QSetUniverse(std::shared_ptr<const Lattice> lat, std::vector<Content> alphabet, std::size_t queueBound,
               std::size_t cap = 200000);

  // Message contents occurring in the program, plus both booleans at every
  // level it mentions.
  static QSetUniverse fromProgram(const Program& prog, std::size_t queueBound, std::size_t cap = 200000);

  const std::vector<Content>& alphabet() const { return alphabet_; }
  std::size_t queueBound() const { return queueBound_; }
  const Lattice& lattice() const { return *lat_; }

  // Every monotone Q-set with one queue per session, queues drawn from the
  // lanes between distinct participants of that session. Returns nullptr when
  // the count exceeds the cap.
  const std::vector<QSet>* qsets(const std::map<std::string, std::set<int>>& sessions) const;

 private:
  const std::vector<Queue>& queuesFor(const std::set<int>& roles) const;

  std::shared_ptr<const Lattice> lat_;
  std::vector<Content> alphabet_;
  std::size_t queueBound_;
  std::size_t cap_;
  mutable std::map<std::set<int>, std::vector<Queue>> queueCache_;
  mutable std::map<std::string, std::optional<std::vector<QSet>>> qsetCache_;
};

// Pairs (H1, H2) of Q-sets over the given sessions with H1 =_L H2.
std::optional<std::vector<std::pair<QSet, QSet>>> enumerateQSetPairs(
    const QSetUniverse& u, const std::map<std::string, std::set<int>>& sessions, const DownSet& L);

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

enum class Verdict { Holds, Fails, Inconclusive };
const char* toString(Verdict v);

struct CheckBounds {
  std::size_t queueBound = 2;
  std::size_t depth = 4;         // simulation search depth in checkSecure
  std::size_t maxStates = 20000;
  std::size_t maxQSets = 200000;
  std::size_t maxSteps = 64;     // exploration depth
};

struct CheckResult {
  std::string property;
  std::optional<DownSet> L;
  Verdict verdict = Verdict::Holds;
  std::string reason;        // why a verdict is inconclusive
  std::size_t states = 0;
  std::size_t qsets = 0;     // Q-sets examined
  nlohmann::json witness;    // null unless the verdict is Fails
};

CheckResult checkSecure(const Program& prog, const DownSet& L, const CheckBounds& b = {});
std::vector<CheckResult> checkSecureAll(const Program& prog, const CheckBounds& b = {});
Verdict overall(const std::vector<CheckResult>& rs);

// Safety of [mu0]P; mu0 defaults to bottom.
CheckResult checkSafe(const Program& prog, const CheckBounds& b = {}, std::optional<Level> mu0 = std::nullopt);
CheckResult checkNoRuntimeError(const Program& prog, const CheckBounds& b = {});
CheckResult checkLHigh(const Program& prog, const DownSet& L, const CheckBounds& b = {});

// Same checks on an explicit process of the program's lattice.
CheckResult checkSecure(const Program& prog, const Process& p, const DownSet& L, const CheckBounds& b);
CheckResult checkSafe(const Program& prog, const Process& p, const CheckBounds& b, std::optional<Level> mu0);
CheckResult checkNoRuntimeError(const Program& prog, const Process& p, const CheckBounds& b);
CheckResult checkLHigh(const Program& prog, const Process& p, const DownSet& L, const CheckBounds& b);

// Replays a checkSecure witness step by step. Returns an empty string when the
// witness reproduces the L-projection disagreement, or the first mismatch.
std::string replaySecureWitness(const Program& prog, const nlohmann::json& witness, const CheckBounds& b = {});
// Replays any safe, noerr or secure witness.
std::string replayWitness(const Program& prog, const nlohmann::json& witness, const CheckBounds& b = {});

// JSON forms of Q-sets used in witnesses.
nlohmann::json qsetToJson(const QSet& h, const Lattice& lat);
QSet qsetFromJson(const nlohmann::json& j, const Lattice& lat);

}  // namespace sesmon
