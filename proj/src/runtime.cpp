#include "sesmon/runtime.hpp"

#include <algorithm>
#include <set>

namespace sesmon {

const char* ruleName(Rule r) {
  switch (r) {
    case Rule::Link: return "Link";
    case Rule::SendV: return "SendV";
    case Rule::RecV: return "RecV";
    case Rule::SendS: return "SendS";
    case Rule::RecS: return "RecS";
    case Rule::SendC: return "SendC";
    case Rule::RecC: return "RecC";
    case Rule::Label: return "Label";
    case Rule::Branch: return "Branch";
    case Rule::IfT: return "If-T";
    case Rule::IfF: return "If-F";
    case Rule::Def: return "Def";
  }
  return "?";
}

const char* monitoredRuleName(Rule r) {
  switch (r) {
    case Rule::Link: return "MLink";
    case Rule::SendV: return "MSendV";
    case Rule::RecV: return "MRecV";
    case Rule::SendS: return "MSendS";
    case Rule::RecS: return "MRecS";
    case Rule::SendC: return "MSendC";
    case Rule::RecC: return "MRecC";
    case Rule::Label: return "MLabel";
    case Rule::Branch: return "MBranch";
    case Rule::IfT: return "MIf-T";
    case Rule::IfF: return "MIf-F";
    case Rule::Def: return "MDef";
  }
  return "?";
}

const char* toString(Outcome o) {
  switch (o) {
    case Outcome::Terminated: return "terminated";
    case Outcome::Stuck: return "stuck";
    case Outcome::StepBound: return "step-bound";
    case Outcome::Error: return "error";
    case Outcome::Diagnostic: return "diagnostic";
  }
  return "?";
}

namespace {

// A channel the semantics can act on: a concrete s[p] whose queue exists.
bool active(const Channel& c, const QSet& h) { return !c.isVariable() && h.count(c.name); }

struct Enumerator {
  const Config& c;
  const Program& prog;
  NameSupply& names;
  std::vector<std::string>& diags;
  std::vector<Redex> out;

  const Lattice& lat() const { return prog.lat(); }

  std::string where(std::size_t i) const { return print(c.parts[i].proc, &lat()); }

  void send(std::size_t i, Rule rule, const Channel& ch, const Roles& to, const Content& content,
            const Process& cont) {
    if (!active(ch, c.qset)) return;
    Redex r;
    r.rule = rule;
    r.consumed = {i};
    r.produced = {cont};
    r.qset = pushMessage(c.qset, ch.name, Message{ch.role, to, content});
    r.level = content.level;
    r.communication = true;
    r.effect = MonitorEffect::Keep;
    r.session = ch.name;
    r.subjectRole = ch.role;
    out.push_back(std::move(r));
  }

  // Returns the popped content, or nothing (with a diagnostic on a level clash).
  std::optional<PopResult> receive(std::size_t i, const Channel& ch, int from, Content::Kind kind, Level l) {
    if (!active(ch, c.qset)) return std::nullopt;
    PopResult p = popMessage(c.qset, ch.name, ch.role, from, kind, l);
    if (p.levelMismatch) {
      const Content* head = c.qset.at(ch.name).head(from, ch.role);
      diags.push_back("LevelMismatch: " + where(i) + " expects level " + lat().name(l) + " but the queue holds " +
                      print(*head, &lat()));
      return std::nullopt;
    }
    if (!p.content) return std::nullopt;
    return p;
  }

  void input(std::size_t i, Rule rule, const Channel& ch, Level l, QSet h, Process cont) {
    Redex r;
    r.rule = rule;
    r.consumed = {i};
    r.produced = {std::move(cont)};
    r.qset = std::move(h);
    r.level = l;
    r.communication = true;
    r.effect = MonitorEffect::Raise;
    r.session = ch.name;
    r.subjectRole = ch.role;
    out.push_back(std::move(r));
  }

  void link(std::size_t i, const Initiator& init) {
    if (init.service.variable) return;
    std::vector<std::vector<std::size_t>> cands(init.arity + 1);
    for (std::size_t j = 0; j < c.parts.size(); ++j) {
      const auto* part = as<Participant>(c.parts[j].proc);
      if (!part || part->service.variable || part->service.name != init.service.name) continue;
      if (part->role >= 1 && part->role <= init.arity) cands[part->role].push_back(j);
    }
    for (int r = 1; r <= init.arity; ++r)
      if (cands[r].empty()) return;
    std::vector<std::size_t> pick(init.arity + 1, 0);
    while (true) {
      Redex rx;
      rx.rule = Rule::Link;
      std::string s = names.fresh();
      for (int r = 1; r <= init.arity; ++r) {
        std::size_t j = cands[r][pick[r]];
        const auto* part = as<Participant>(c.parts[j].proc);
        Substitution sub;
        sub.channels[part->chan] = Channel::withRole(s, r);
        rx.consumed.push_back(j);
        rx.produced.push_back(substitute(part->body, sub, lat()));
      }
      rx.consumed.push_back(i);
      rx.qset = c.qset;
      rx.qset[s];
      rx.effect = MonitorEffect::Link;
      rx.session = s;
      rx.fresh = {s};
      out.push_back(std::move(rx));
      int r = init.arity;
      while (r >= 1 && ++pick[r] == cands[r].size()) pick[r--] = 0;
      if (r < 1) break;
    }
  }

  void visit(std::size_t i) {
    const Process& p = c.parts[i].proc;
    if (const auto* x = as<Initiator>(p)) {
      link(i, *x);
    } else if (const auto* x = as<SendValue>(p)) {
      if (!active(x->chan, c.qset)) return;
      Value v;
      try {
        v = evaluate(x->expr, {}, lat());
      } catch (const EvalError& e) {
        diags.push_back(std::string(e.kind() == EvalError::Kind::TypeMismatch ? "TypeMismatch: " : "UnboundVariable: ") +
                        e.what() + " in " + where(i));
        return;
      }
      send(i, Rule::SendV, x->chan, x->to, Content::ofValue(v), x->cont);
    } else if (const auto* x = as<RecvValue>(p)) {
      if (auto r = receive(i, x->chan, x->from, Content::Kind::Value, x->level)) {
        Substitution sub;
        sub.values[x->var] = Value{r->content->value, x->level};
        input(i, Rule::RecV, x->chan, x->level, std::move(r->qset), substitute(x->cont, sub, lat()));
      }
    } else if (const auto* x = as<SendService>(p)) {
      if (x->service.variable) return;
      send(i, Rule::SendS, x->chan, x->to, Content::ofService(x->service.name, x->level), x->cont);
    } else if (const auto* x = as<RecvService>(p)) {
      if (auto r = receive(i, x->chan, x->from, Content::Kind::Service, x->level)) {
        Substitution sub;
        sub.services[x->var] = r->content->name;
        input(i, Rule::RecS, x->chan, x->level, std::move(r->qset), substitute(x->cont, sub, lat()));
      }
    } else if (const auto* x = as<SendChannel>(p)) {
      if (x->delegated.isVariable()) return;
      send(i, Rule::SendC, x->chan, {x->to}, Content::ofChannel(x->delegated.name, x->delegated.role, x->level),
           x->cont);
    } else if (const auto* x = as<RecvChannel>(p)) {
      if (auto r = receive(i, x->chan, x->from, Content::Kind::Channel, x->level)) {
        Substitution sub;
        sub.channels[x->var] = Channel::withRole(r->content->name, r->content->role);
        input(i, Rule::RecC, x->chan, x->level, std::move(r->qset), substitute(x->cont, sub, lat()));
      }
    } else if (const auto* x = as<Select>(p)) {
      send(i, Rule::Label, x->chan, x->to, Content::ofLabel(x->label, x->level), x->cont);
    } else if (const auto* x = as<Branch>(p)) {
      if (auto r = receive(i, x->chan, x->from, Content::Kind::Label, x->level)) {
        auto arm = std::find_if(x->arms.begin(), x->arms.end(),
                                [&](const auto& a) { return a.first == r->content->name; });
        if (arm == x->arms.end()) {
          diags.push_back("StuckBranchLabel: no branch for label '" + r->content->name + "' in " + where(i));
          return;
        }
        input(i, Rule::Branch, x->chan, x->level, std::move(r->qset), arm->second);
      }
    } else if (const auto* x = as<Conditional>(p)) {
      Value v;
      try {
        v = evaluate(x->guard, {}, lat());
      } catch (const EvalError& e) {
        diags.push_back(std::string(e.kind() == EvalError::Kind::TypeMismatch ? "TypeMismatch: " : "UnboundVariable: ") +
                        e.what() + " in " + where(i));
        return;
      }
      const bool* b = std::get_if<bool>(&v.payload);
      if (!b) {
        diags.push_back("TypeMismatch: non-boolean guard in " + where(i));
        return;
      }
      Redex r;
      r.rule = *b ? Rule::IfT : Rule::IfF;
      r.consumed = {i};
      r.produced = {*b ? x->then_branch : x->else_branch};
      r.qset = c.qset;
      r.level = v.level;
      r.effect = MonitorEffect::Join;
      out.push_back(std::move(r));
    } else if (const auto* x = as<Call>(p)) {
      if (x->chan.isVariable()) return;
      auto it = prog.decls.find(x->name);
      if (it == prog.decls.end()) {
        diags.push_back("UnboundVariable: no declaration '" + x->name + "'");
        return;
      }
      const Decl& d = *it->second;
      Substitution sub;
      try {
        for (std::size_t k = 0; k < d.params.size() && k < x->args.size(); ++k)
          sub.values[d.params[k].first] = evaluate(x->args[k], {}, lat());
      } catch (const EvalError& e) {
        diags.push_back(std::string("TypeMismatch: ") + e.what() + " in " + where(i));
        return;
      }
      sub.channels[d.chan] = x->chan;
      Redex r;
      r.rule = Rule::Def;
      r.consumed = {i};
      r.produced = {substitute(d.body, sub, lat())};
      r.qset = c.qset;
      r.effect = MonitorEffect::Keep;
      r.session = x->chan.name;
      r.subjectRole = x->chan.role;
      out.push_back(std::move(r));
    }
  }
};

}  // namespace

std::vector<Redex> enumerateRedexes(const Config& c, const Program& prog, NameSupply& names,
                                    std::vector<std::string>& diagnostics) {
  Enumerator e{c, prog, names, diagnostics, {}};
  for (std::size_t i = 0; i < c.parts.size(); ++i) e.visit(i);
  return std::move(e.out);
}

Transition fire(const Config& c, const Redex& r, Level mu, const Program& prog, NameSupply& names, bool canonical) {
  Transition t;
  StepLabel& l = t.label;
  l.rule = r.rule;
  l.session = r.session;
  l.subjectRole = r.subjectRole;
  l.level = r.level;
  l.fresh = r.fresh;
  l.freshSessions = r.fresh.size();

  std::vector<bool> gone(c.parts.size(), false);
  for (std::size_t i : r.consumed) {
    gone[i] = true;
    l.redex.push_back(print(c.parts[i].proc, &prog.lat()));
    l.monitorsBefore.push_back(c.parts[i].monitor);
    l.parents.push_back(c.parts[i].lineage);
  }
  std::vector<Component> parts;
  for (std::size_t i = 0; i < c.parts.size(); ++i)
    if (!gone[i]) parts.push_back(c.parts[i]);
  std::uint32_t next = c.nextLineage;
  for (const auto& p : r.produced) {
    parts.push_back({p, mu, next});
    l.children.push_back(next++);
    l.monitorsAfter.push_back(mu);
  }

  std::size_t before = names.issued().size();
  t.next = normalize(std::move(parts), r.qset, c.monitored, names);
  t.next.nextLineage = next;
  for (std::size_t k = before; k < names.issued().size(); ++k) l.fresh.push_back(names.issued()[k]);
  if (canonical) {
    auto m = canonicalize(t.next);
    std::vector<std::string> renamed;
    for (const auto& n : l.fresh) {
      auto it = m.find(n);
      // A fresh name that was garbage-collected away leaves no trace.
      if (it != m.end()) renamed.push_back(it->second);
    }
    l.fresh = std::move(renamed);
    if (auto it = m.find(l.session); it != m.end()) l.session = it->second;
  }
  return t;
}

StepResult stepStandard(const Config& c, const Program& prog, StepOptions opts) {
  NameSupply local("_x");
  NameSupply& names = opts.supply ? *opts.supply : local;
  StepResult out;
  auto redexes = enumerateRedexes(c, prog, names, out.diagnostics);
  std::set<std::pair<Rule, std::string>> seen;
  for (const auto& r : redexes) {
    Transition t = fire(c, r, prog.lat().bottom(), prog, names, opts.canonical);
    // Symmetric redexes lead to the same canonical successor.
    if (opts.canonical && !seen.insert({t.label.rule, configKey(t.next)}).second) continue;
    out.successors.push_back(std::move(t));
  }
  return out;
}

std::size_t Picker::pick(const std::vector<const StepLabel*>& labels) {
  if (labels.empty()) return 0;
  if (sched_.kind == Scheduler::Kind::Random) {
    std::uniform_int_distribution<std::size_t> d(0, labels.size() - 1);
    return d(rng_);
  }
  for (int role : sched_.preferRoles)
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i]->subjectRole == role && !labels[i]->session.empty()) return i;
  return 0;
}

Trace runStandard(const Config& c, const Program& prog, const Scheduler& sched, std::size_t maxSteps) {
  Trace t;
  t.initial = c;
  Picker picker(sched);
  while (true) {
    StepResult r = stepStandard(t.final(), prog);
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
