#include "campaign/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "campaign/csv.hpp"
#include "campaign/errors.hpp"
#include "campaign/rng.hpp"

namespace campaign::tc {

char class_letter(ClassCode code) {
  if (code >= kClassCount) throw InputError("class code out of range: " + std::to_string(code));
  return kAlphabet[code];
}

std::optional<ClassCode> class_code(char letter) {
  auto pos = kAlphabet.find(letter);
  if (pos == std::string_view::npos) return std::nullopt;
  return static_cast<ClassCode>(pos);
}

std::vector<ClassSequence> parse_class_file(std::istream& in) {
  std::vector<ClassSequence> residues;
  std::string line;
  std::size_t lineno = 0;
  std::size_t blank_run_start = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (blank_run_start == 0) blank_run_start = lineno;
      continue;
    }
    if (blank_run_start != 0)
      throw ParseError(blank_run_start, "blank line inside the frame list");
    if (residues.empty()) {
      residues.resize(line.size());
      for (std::size_t r = 0; r < residues.size(); ++r) residues[r].residue = r;
    } else if (line.size() != residues.size()) {
      throw ParseError(lineno, "expected " + std::to_string(residues.size()) +
                                   " residues, found " + std::to_string(line.size()));
    }
    for (std::size_t r = 0; r < line.size(); ++r) {
      auto code = class_code(line[r]);
      if (!code)
        throw ParseError(lineno, "unknown class '" + std::string(1, line[r]) + "' at column " +
                                     std::to_string(r + 1));
      residues[r].frames.push_back(*code);
    }
  }
  if (residues.empty()) throw InputError("class file contains no frames");
  return residues;
}

std::vector<ClassSequence> parse_class_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_class_file(in);
}

void write_class_file(std::ostream& out, std::span<const ClassSequence> residues) {
  if (residues.empty()) return;
  const auto frames = residues.front().frames.size();
  for (const auto& r : residues)
    if (r.frames.size() != frames) throw InputError("residue sequences differ in length");
  std::string line(residues.size(), ' ');
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t r = 0; r < residues.size(); ++r) line[r] = class_letter(residues[r].frames[f]);
    out << line << '\n';
  }
}

std::optional<TransitionEvent> detect_event(const ClassSequence& seq) {
  for (std::size_t t = 1; t < seq.frames.size(); ++t)
    if (seq.frames[t] != seq.frames[t - 1])
      return TransitionEvent{seq.residue, t, seq.frames[t - 1]};
  return std::nullopt;
}

namespace {

void check_event(const ClassSequence& seq, const TransitionEvent& event) {
  if (event.t_a >= seq.frames.size())
    throw EstimationError("insufficient data: event lies beyond the sequence end");
}

}  // namespace

TransitionMatrix build_matrix(const ClassSequence& seq, const TransitionEvent& event,
                              std::size_t window) {
  check_event(seq, event);
  const auto end = std::min(seq.frames.size(), event.t_a + window);
  if (end < event.t_a + 2)
    throw EstimationError("insufficient data: transition window holds fewer than two frames");
  std::array<std::array<std::size_t, kClassCount>, kClassCount> counts{};
  for (std::size_t t = event.t_a + 1; t < end; ++t) {
    const auto from = seq.frames[t - 1], to = seq.frames[t];
    if (from >= kClassCount || to >= kClassCount) throw InputError("class code out of range");
    ++counts[from][to];
  }
  TransitionMatrix m{};
  for (std::size_t k = 0; k < kClassCount; ++k) {
    std::size_t total = 0;
    for (auto c : counts[k]) total += c;
    if (total == 0) {
      m[k][k] = 1.0;
      continue;
    }
    for (std::size_t l = 0; l < kClassCount; ++l)
      m[k][l] = static_cast<double>(counts[k][l]) / static_cast<double>(total);
  }
  return m;
}

bool is_row_stochastic(const TransitionMatrix& m, double tol) {
  for (const auto& row : m) {
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

ClassDistribution predict_occupancy(const TransitionMatrix& m, ClassCode start,
                                    std::size_t horizon) {
  if (!is_row_stochastic(m)) throw InputError("transition matrix is not row-stochastic");
  if (horizon == 0) throw InputError("horizon must be >= 1");
  if (start >= kClassCount) throw InputError("start class out of range");
  ClassDistribution v{}, acc{};
  v[start] = 1.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    ClassDistribution next{};
    for (std::size_t k = 0; k < kClassCount; ++k) {
      if (v[k] == 0.0) continue;
      for (std::size_t l = 0; l < kClassCount; ++l) next[l] += v[k] * m[k][l];
    }
    v = next;
    for (std::size_t l = 0; l < kClassCount; ++l) acc[l] += v[l];
  }
  for (auto& a : acc) a /= static_cast<double>(horizon);
  return acc;
}

ClassDistribution observed_occupancy(const ClassSequence& seq, const TransitionEvent& event,
                                     std::size_t horizon) {
  check_event(seq, event);
  const auto end = std::min(seq.frames.size(), event.t_a + horizon + 1);
  if (end <= event.t_a + 1) throw EstimationError("insufficient data: no frames after the event");
  ClassDistribution d{};
  for (std::size_t t = event.t_a + 1; t < end; ++t) {
    if (seq.frames[t] >= kClassCount) throw InputError("class code out of range");
    d[seq.frames[t]] += 1.0;
  }
  const auto n = static_cast<double>(end - event.t_a - 1);
  for (auto& x : d) x /= n;
  return d;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InputError("distributions differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) sum += p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) sum += q[i] * std::log2(q[i] / m);
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

ClassCode modal_class(const ClassDistribution& d) {
  return static_cast<ClassCode>(std::max_element(d.begin(), d.end()) - d.begin());
}

ClassDistribution MarkovPredictor::predict(const ClassSequence& seq, const TransitionEvent& event,
                                           std::size_t horizon) const {
  const auto m = build_matrix(seq, event, window_);
  return predict_occupancy(m, seq.frames[event.t_a], horizon);
}

std::vector<LabelDivergence> evaluate_transitions(std::span<const EventOutcome> outcomes) {
  struct Group {
    std::size_t n = 0;
    ClassDistribution p{}, q{};
  };
  std::map<std::string, Group> groups;
  for (const auto& o : outcomes) {
    std::string label;
    label += static_cast<char>('0' + o.event.initial_class);
    label += static_cast<char>('0' + modal_class(o.observed));
    auto& g = groups[label];
    ++g.n;
    for (std::size_t k = 0; k < kClassCount; ++k) {
      g.p[k] += o.predicted[k];
      g.q[k] += o.observed[k];
    }
  }
  std::vector<LabelDivergence> rows;
  for (auto& [label, g] : groups) {
    for (std::size_t k = 0; k < kClassCount; ++k) {
      g.p[k] /= static_cast<double>(g.n);
      g.q[k] /= static_cast<double>(g.n);
    }
    rows.push_back(LabelDivergence{label, g.n, js_divergence(g.p, g.q)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.js_divergence < b.js_divergence;
  });
  return rows;
}

ClassificationRun classify(std::span<const ClassSequence> residues,
                           const OccupancyPredictor& predictor, const ClassifierOptions& opts) {
  ClassificationRun run;
  for (const auto& seq : residues) {
    auto event = detect_event(seq);
    if (!event) continue;
    try {
      EventOutcome o{*event, predictor.predict(seq, *event, opts.horizon),
                     observed_occupancy(seq, *event, opts.horizon)};
      run.outcomes.push_back(o);
    } catch (const EstimationError&) {
      run.skipped.push_back(seq.residue);
    }
  }
  run.table = evaluate_transitions(run.outcomes);
  return run;
}

void write_evaluation_csv(std::ostream& out, std::span<const LabelDivergence> rows) {
  csv::Writer w(out);
  w.row({"label", "js_divergence"});
  for (const auto& r : rows) {
    w.field(r.label).field(r.js_divergence);
    w.end_row();
  }
}

std::vector<LabelDivergence> read_evaluation_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_label = table.column("label");
  const auto c_jsd = table.column("js_divergence");
  std::vector<LabelDivergence> rows;
  for (const auto& row : table.rows()) {
    const auto& label = row.fields[c_label];
    if (label.size() != 2 || label[0] < '0' || label[0] > '7' || label[1] < '0' || label[1] > '7')
      throw ParseError(row.line, "malformed label '" + label + "'");
    LabelDivergence d;
    d.label = label;
    d.js_divergence = csv::parse_double(row.fields[c_jsd], row.line);
    if (!(d.js_divergence >= 0.0 && d.js_divergence <= 1.0))
      throw ParseError(row.line, "divergence outside [0, 1]");
    rows.push_back(std::move(d));
  }
  return rows;
}

ClassSequence generate_markov_sequence(const TransitionMatrix& m, ClassCode start,
                                       std::size_t length, std::uint64_t seed,
                                       std::size_t residue) {
  if (!is_row_stochastic(m)) throw InputError("transition matrix is not row-stochastic");
  if (length == 0) throw InputError("sequence length must be >= 1");
  if (start >= kClassCount) throw InputError("start class out of range");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ClassSequence seq{residue, {}};
  seq.frames.reserve(length);
  ClassCode cur = start;
  seq.frames.push_back(cur);
  for (std::size_t t = 1; t < length; ++t) {
    const double u = unit(rng);
    double cum = 0.0;
    ClassCode next = cur;
    for (std::size_t l = 0; l < kClassCount; ++l) {
      if (m[cur][l] <= 0.0) continue;
      cum += m[cur][l];
      next = static_cast<ClassCode>(l);
      if (u < cum) break;
    }
    cur = next;
    seq.frames.push_back(cur);
  }
  return seq;
}

}  // namespace campaign::tc
