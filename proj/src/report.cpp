#include "sesmon/report.hpp"

#include <sstream>

namespace sesmon {

using nlohmann::json;

json latticeToJson(const Lattice& lat) {
  json order = json::array();
  for (Level a : lat.levels())
    for (Level b : lat.levels())
      if (a != b && lat.leq(a, b)) order.push_back({lat.name(a), lat.name(b)});
  return {{"elements", lat.names()}, {"order", std::move(order)}};
}

namespace {

json levelNames(const std::vector<Level>& ls, const Lattice& lat) {
  json out = json::array();
  for (Level l : ls) out.push_back(lat.name(l));
  return out;
}

}  // namespace

json stepsToJson(const Trace& t, const Lattice& lat, bool monitored) {
  json out = json::array();
  for (const auto& s : t.steps) {
    json j = {{"rule", monitored ? monitoredRuleName(s.label.rule) : ruleName(s.label.rule)},
              {"redex", s.label.redex},
              {"next", print(s.next, &lat)}};
    if (s.label.level) j["level"] = lat.name(*s.label.level);
    if (monitored) {
      j["monitorsBefore"] = levelNames(s.label.monitorsBefore, lat);
      j["monitorsAfter"] = levelNames(s.label.monitorsAfter, lat);
    }
    out.push_back(std::move(j));
  }
  return out;
}

json verdictToJson(const CheckResult& r, const Lattice& lat) {
  json j = {{"property", r.property}, {"verdict", toString(r.verdict)}, {"states", r.states}, {"qsets", r.qsets}};
  if (r.L) j["L"] = r.L->toString(lat);
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

json makeReport(const std::string& command, const std::string& program, const Lattice& lat, json steps,
                json verdicts, json witness) {
  return {{"command", command},
          {"program", program},
          {"lattice", latticeToJson(lat)},
          {"steps", std::move(steps)},
          {"verdicts", std::move(verdicts)},
          {"witness", std::move(witness)}};
}

std::string formatTrace(const Trace& t, const Lattice& lat, bool monitored) {
  std::ostringstream os;
  os << "0: " << print(t.initial, &lat) << "\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    os << i + 1 << ": " << (monitored ? monitoredRuleName(s.label.rule) : ruleName(s.label.rule)) << "  "
       << print(s.next, &lat) << "\n";
  }
  return os.str();
}

}  // namespace sesmon
