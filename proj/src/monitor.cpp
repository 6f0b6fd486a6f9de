#include "sesmon/monitor.hpp"

#include <set>

namespace sesmon {

namespace {

void flattenMonitors(Config& c, const Lattice& lat, bool canonical) {
  Level mu = lat.bottom();
  for (const auto& p : c.parts) mu = lat.join(mu, p.monitor);
  for (auto& p : c.parts) p.monitor = mu;
  NameSupply none("_n");
  std::uint32_t next = c.nextLineage;
  c = normalize(std::move(c.parts), std::move(c.qset), true, none);
  c.nextLineage = next;
  if (canonical) canonicalize(c);
}

}  // namespace

MStepResult stepMonitored(const Config& c, const Program& prog, MStepOptions opts) {
  const Lattice& lat = prog.lat();
  NameSupply local("_x");
  NameSupply& names = opts.supply ? *opts.supply : local;
  MStepResult out;
  auto redexes = enumerateRedexes(c, prog, names, out.diagnostics);
  std::set<std::pair<Rule, std::string>> seen, seenErrors;
  for (const auto& r : redexes) {
    Level subject = c.parts[r.consumed.front()].monitor;
    if (r.communication && !lat.leq(subject, *r.level)) {
      Transition t = fire(c, r, subject, prog, names, opts.canonical);
      if (opts.canonical && !seenErrors.insert({t.label.rule, configKey(t.next)}).second) continue;
      out.errors.push_back({std::move(t.label), subject, *r.level, std::move(t.next)});
      continue;
    }
    Level mu = subject;
    switch (r.effect) {
      case MonitorEffect::Keep:
        break;
      case MonitorEffect::Raise:
        mu = *r.level;
        break;
      case MonitorEffect::Join:
        mu = lat.join(subject, *r.level);
        break;
      case MonitorEffect::Link:
        for (std::size_t i : r.consumed) mu = lat.join(mu, c.parts[i].monitor);
        break;
    }
    Transition t = fire(c, r, mu, prog, names, opts.canonical);
    if (opts.singleMonitor) {
      flattenMonitors(t.next, lat, opts.canonical);
      t.label.monitorsAfter.assign(t.label.monitorsAfter.size(), t.next.parts.empty() ? mu : t.next.parts.front().monitor);
    }
    if (opts.canonical && !seen.insert({t.label.rule, configKey(t.next)}).second) continue;
    out.successors.push_back(std::move(t));
  }
  return out;
}

Trace runMonitored(const Config& c, const Program& prog, const Scheduler& sched, std::size_t maxSteps,
                   bool singleMonitor) {
  Trace t;
  t.initial = c;
  Picker picker(sched);
  MStepOptions opts;
  opts.singleMonitor = singleMonitor;
  while (true) {
    MStepResult r = stepMonitored(t.final(), prog, opts);
    if (r.error()) {
      const MonitorError& e = r.errors.front();
      t.outcome = Outcome::Error;
      t.error = ErrorInfo{e.label, e.monitor, e.level, e.blocked};
      t.diagnostics = r.diagnostics;
      return t;
    }
    if (r.successors.empty()) {
      t.diagnostics = r.diagnostics;
      if (allNil(t.final())) t.outcome = Outcome::Terminated;
      else t.outcome = r.diagnostics.empty() ? Outcome::Stuck : Outcome::Diagnostic;
      return t;
    }
    if (t.steps.size() >= maxSteps) {
      t.outcome = Outcome::StepBound;
      return t;
    }
    std::vector<const StepLabel*> labels;
    for (const auto& s : r.successors) labels.push_back(&s.label);
    t.steps.push_back(std::move(r.successors[picker.pick(labels)]));
  }
}

}  // namespace sesmon
