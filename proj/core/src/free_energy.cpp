#include "campaign/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "campaign/csv.hpp"
#include "campaign/errors.hpp"
#include "campaign/rng.hpp"

namespace campaign::fe {

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void check_series(std::span<const double> samples, const std::string& what) {
  if (samples.empty()) throw InputError(what + " has no samples");
  for (double x : samples)
    if (!std::isfinite(x)) throw InputError(what + " contains a non-finite sample");
}

// Means of resampled-with-replacement copies of `values`.
double resample_mean(std::span<const double> values, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += values[pick(rng)];
  return sum / static_cast<double>(values.size());
}

}  // namespace

EsmacsEstimate esmacs_aggregate(std::span<const ReplicaSeries> replicas,
                                const BootstrapOptions& opts) {
  if (replicas.size() < 2)
    throw EstimationError("ensemble required: at least two replicas are needed");
  if (opts.resamples < 100) throw InputError("bootstrap needs at least 100 resamples");
  if (!(opts.ci_level > 0.0 && opts.ci_level < 1.0))
    throw InputError("ci_level must lie in (0, 1)");

  std::vector<double> means;
  means.reserve(replicas.size());
  for (const auto& r : replicas) {
    check_series(r.samples, "replica '" + r.replica_id + "'");
    means.push_back(mean_of(r.samples));
  }
  // Sorting makes both the point estimate and the bootstrap stream
  // independent of the order replicas were supplied in.
  std::sort(means.begin(), means.end());

  EsmacsEstimate est;
  est.dg = mean_of(means);
  est.replicas = means.size();

  Rng rng(opts.seed);
  std::vector<double> boot(opts.resamples);
  for (auto& b : boot) b = resample_mean(means, rng);
  std::sort(boot.begin(), boot.end());
  const double alpha = 1.0 - opts.ci_level;
  est.ci_low = std::min(quantile_sorted(boot, alpha / 2.0), est.dg);
  est.ci_high = std::max(quantile_sorted(boot, 1.0 - alpha / 2.0), est.dg);
  return est;
}

double trapezoid(std::span<const WindowMean> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += 0.5 * (points[i].mean + points[i - 1].mean) *
            (points[i].lambda - points[i - 1].lambda);
  return area;
}

TiesEstimate ties_integrate(std::span<const LambdaWindow> windows,
                            const BootstrapOptions& opts) {
  if (windows.size() < 2) throw InputError("at least two lambda windows are required");
  if (opts.resamples < 2) throw InputError("bootstrap needs at least 2 resamples");

  std::vector<const LambdaWindow*> sorted;
  for (const auto& w : windows) {
    if (!(w.lambda >= 0.0 && w.lambda <= 1.0))
      throw InputError("lambda " + csv::format_double(w.lambda) + " outside [0, 1]");
    sorted.push_back(&w);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const LambdaWindow* a, const LambdaWindow* b) { return a->lambda < b->lambda; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i]->lambda == sorted[i - 1]->lambda)
      throw InputError("duplicate lambda " + csv::format_double(sorted[i]->lambda));
  if (sorted.front()->lambda != 0.0 || sorted.back()->lambda != 1.0)
    throw EstimationError("incomplete alchemical path: lambda 0 and 1 are both required");

  // Per-window replica means, sorted for order independence.
  std::vector<std::vector<double>> replica_means(sorted.size());
  TiesEstimate est;
  est.windows = sorted.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& w = *sorted[i];
    const auto where = "window lambda=" + csv::format_double(w.lambda);
    if (w.replicas.size() < 2)
      throw InputError(where + " needs at least two replicas");
    for (const auto& r : w.replicas) {
      check_series(r, where + " replica");
      replica_means[i].push_back(mean_of(r));
    }
    std::sort(replica_means[i].begin(), replica_means[i].end());
    est.window_means.push_back(WindowMean{w.lambda, mean_of(replica_means[i])});
  }
  est.ddg = trapezoid(est.window_means);

  Rng rng(opts.seed);
  std::vector<WindowMean> resampled = est.window_means;
  // Welford keeps sigma exactly zero when every resample is identical.
  double running_mean = 0.0, m2 = 0.0;
  for (std::size_t b = 0; b < opts.resamples; ++b) {
    for (std::size_t i = 0; i < resampled.size(); ++i)
      resampled[i].mean = resample_mean(replica_means[i], rng);
    const double x = trapezoid(resampled);
    const double delta = x - running_mean;
    running_mean += delta / static_cast<double>(b + 1);
    m2 += delta * (x - running_mean);
  }
  est.sigma = std::sqrt(m2 / static_cast<double>(opts.resamples - 1));
  return est;
}

double dg_to_kd(double dg, double rt) {
  if (!(rt > 0.0)) throw InputError("RT must be positive");
  return std::exp(dg / rt);
}

double kd_to_dg(double kd, double rt) {
  if (!(rt > 0.0)) throw InputError("RT must be positive");
  if (!(kd > 0.0)) throw InputError("K_D must be positive");
  return rt * std::log(kd);
}

std::string_view label(AffinityBin bin) {
  switch (bin) {
    case AffinityBin::Below10nM: return "dG < -10.98";
    case AffinityBin::From10To100nM: return "-10.98 <= dG < -9.61";
    case AffinityBin::From100nMTo1uM: return "-9.61 <= dG < -8.24";
    case AffinityBin::Weaker: return "dG >= -8.24";
  }
  return "";
}

AffinityBin classify_affinity(double dg, const AffinityThresholds& t) {
  if (dg < t.nm10) return AffinityBin::Below10nM;
  if (dg < t.nm100) return AffinityBin::From10To100nM;
  if (dg < t.um1) return AffinityBin::From100nMTo1uM;
  return AffinityBin::Weaker;
}

AffinityCounts bin_affinities(std::span<const CompoundAffinity> estimates,
                              const AffinityThresholds& t) {
  if (!(t.nm10 < t.nm100 && t.nm100 < t.um1))
    throw InputError("affinity thresholds must be strictly increasing");
  AffinityCounts c;
  for (const auto& e : estimates) {
    switch (classify_affinity(e.dg, t)) {
      case AffinityBin::Below10nM: ++c.below_10nm; break;
      case AffinityBin::From10To100nM: ++c.from_10_to_100nm; break;
      case AffinityBin::From100nMTo1uM: ++c.from_100nm_to_1um; break;
      case AffinityBin::Weaker: ++c.weaker; break;
    }
  }
  return c;
}

void write_bin_table_csv(std::ostream& out, std::span<const TargetCounts> targets,
                         const AffinityThresholds& t) {
  csv::Writer w(out);
  w.field("energy_kcal_mol");
  for (const auto& tc : targets) w.field(tc.target);
  w.end_row();
  auto emit = [&](std::string_view name, auto getter) {
    w.field(name);
    for (const auto& tc : targets) w.field(getter(tc.counts));
    w.end_row();
  };
  const auto fmt = [](double x) { return csv::format_double(x); };
  emit("dG < " + fmt(t.nm10), [](const AffinityCounts& c) { return c.below_10nm; });
  emit(fmt(t.nm10) + " <= dG < " + fmt(t.nm100),
       [](const AffinityCounts& c) { return c.from_10_to_100nm; });
  emit(fmt(t.nm100) + " <= dG < " + fmt(t.um1),
       [](const AffinityCounts& c) { return c.from_100nm_to_1um; });
  emit("dG < " + fmt(t.um1) + " total",
       [](const AffinityCounts& c) { return c.total_below_1um(); });
  emit("dG >= " + fmt(t.um1), [](const AffinityCounts& c) { return c.weaker; });
}

TransformationSummary summarize_transformations(std::span<const Transformation> table,
                                                double precision_bound) {
  if (table.empty()) throw InputError("transformation table is empty");
  TransformationSummary s;
  s.total = table.size();
  s.precision_bound = precision_bound;
  s.min_ddg = table.front().ddg;
  s.max_ddg = table.front().ddg;
  s.max_sigma = -1.0;
  for (const auto& t : table) {
    if (!(t.sigma >= 0.0))
      throw InputError("negative sigma for transformation '" + t.label + "'");
    const bool zero = std::abs(t.ddg) <= 2.0 * t.sigma;
    if (t.ddg > 1.0) ++s.unfavourable;
    if (zero) ++s.statistically_zero;
    if (t.ddg < 0.0 && !zero) ++s.favourable;
    if (t.sigma <= precision_bound) ++s.sigma_within_precision;
    if (t.sigma > s.max_sigma) {
      s.max_sigma = t.sigma;
      s.max_sigma_label = t.label;
    }
    s.min_ddg = std::min(s.min_ddg, t.ddg);
    s.max_ddg = std::max(s.max_ddg, t.ddg);
  }
  return s;
}

std::vector<Transformation> read_transformations_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_label = table.column("label"), c_ddg = table.column("ddg_kcal_mol"),
             c_sigma = table.column("sigma_kcal_mol");
  std::vector<Transformation> out;
  for (const auto& row : table.rows()) {
    Transformation t{row.fields[c_label], csv::parse_double(row.fields[c_ddg], row.line),
                     csv::parse_double(row.fields[c_sigma], row.line)};
    if (t.sigma < 0.0) throw ParseError(row.line, "negative sigma");
    out.push_back(std::move(t));
  }
  return out;
}

void write_transformations_csv(std::ostream& out, std::span<const Transformation> table) {
  csv::Writer w(out);
  w.row({"label", "ddg_kcal_mol", "sigma_kcal_mol"});
  for (const auto& t : table) {
    w.field(t.label).field(t.ddg).field(t.sigma);
    w.end_row();
  }
}

void write_transformation_summary(std::ostream& out, const TransformationSummary& s) {
  out << s.unfavourable << '/' << s.total << " transformations with ddG > +1\n";
  out << s.statistically_zero << '/' << s.total
      << " transformations statistically zero (|ddG| <= 2 sigma)\n";
  out << s.favourable << '/' << s.total << " transformations favourable (ddG < 0, resolved)\n";
  out << "ddG range [" << csv::format_double(s.min_ddg) << ", "
      << csv::format_double(s.max_ddg) << "] kcal/mol\n";
  out << "max sigma " << csv::format_double(s.max_sigma) << " kcal/mol at "
      << s.max_sigma_label << '\n';
  out << s.sigma_within_precision << '/' << s.total << " with sigma <= "
      << csv::format_double(s.precision_bound) << " kcal/mol\n";
}

std::vector<CompoundSeries> read_esmacs_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_cmp = table.column("compound_id"), c_rep = table.column("replica_id"),
             c_frame = table.column("frame"), c_e = table.column("energy_kcal_mol");

  std::vector<CompoundSeries> out;
  std::map<std::string, std::size_t> compound_index;
  std::vector<std::map<std::string, std::size_t>> replica_index;
  std::vector<std::vector<std::map<std::int64_t, double>>> frames;

  for (const auto& row : table.rows()) {
    const auto& cid = row.fields[c_cmp];
    const auto& rid = row.fields[c_rep];
    const auto frame = csv::parse_int(row.fields[c_frame], row.line);
    const double e = csv::parse_double(row.fields[c_e], row.line);
    if (!std::isfinite(e)) throw ParseError(row.line, "non-finite energy");
    if (cid.empty() || rid.empty()) throw ParseError(row.line, "empty compound or replica id");

    auto [cit, cnew] = compound_index.try_emplace(cid, out.size());
    if (cnew) {
      out.push_back(CompoundSeries{cid, {}});
      replica_index.emplace_back();
      frames.emplace_back();
    }
    const auto ci = cit->second;
    auto [rit, rnew] = replica_index[ci].try_emplace(rid, out[ci].replicas.size());
    if (rnew) {
      out[ci].replicas.push_back(ReplicaSeries{rid, {}});
      frames[ci].emplace_back();
    }
    if (!frames[ci][rit->second].emplace(frame, e).second)
      throw ParseError(row.line, "duplicate frame " + std::to_string(frame) + " for replica '" +
                                     rid + "' of '" + cid + "'");
  }
  for (std::size_t c = 0; c < out.size(); ++c)
    for (std::size_t r = 0; r < out[c].replicas.size(); ++r)
      for (const auto& [idx, e] : frames[c][r]) out[c].replicas[r].samples.push_back(e);
  return out;
}

void write_esmacs_csv(std::ostream& out, std::span<const CompoundSeries> data) {
  csv::Writer w(out);
  w.row({"compound_id", "replica_id", "frame", "energy_kcal_mol"});
  for (const auto& c : data)
    for (const auto& r : c.replicas)
      for (std::size_t f = 0; f < r.samples.size(); ++f) {
        w.field(c.compound_id).field(r.replica_id).field(f).field(r.samples[f]);
        w.end_row();
      }
}

std::vector<TransformationWindows> read_ties_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_id = table.column("transformation_id"), c_l = table.column("lambda"),
             c_rep = table.column("replica_id"), c_idx = table.column("sample_index"),
             c_v = table.column("dudl_kcal_mol");

  struct Acc {
    std::vector<double> lambdas;
    std::vector<std::vector<std::string>> replica_ids;
    std::vector<std::vector<std::map<std::int64_t, double>>> samples;
  };
  std::vector<TransformationWindows> out;
  std::vector<Acc> acc;
  std::map<std::string, std::size_t> index;

  for (const auto& row : table.rows()) {
    const auto& tid = row.fields[c_id];
    const double lambda = csv::parse_double(row.fields[c_l], row.line);
    const auto& rid = row.fields[c_rep];
    const auto sidx = csv::parse_int(row.fields[c_idx], row.line);
    const double v = csv::parse_double(row.fields[c_v], row.line);
    if (!std::isfinite(v)) throw ParseError(row.line, "non-finite dU/dlambda");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParseError(row.line, "lambda outside [0, 1]");

    auto [it, fresh] = index.try_emplace(tid, out.size());
    if (fresh) {
      out.push_back(TransformationWindows{tid, {}});
      acc.emplace_back();
    }
    auto& a = acc[it->second];
    auto lit = std::find(a.lambdas.begin(), a.lambdas.end(), lambda);
    const auto wi = static_cast<std::size_t>(lit - a.lambdas.begin());
    if (lit == a.lambdas.end()) {
      a.lambdas.push_back(lambda);
      a.replica_ids.emplace_back();
      a.samples.emplace_back();
    }
    auto rit = std::find(a.replica_ids[wi].begin(), a.replica_ids[wi].end(), rid);
    const auto ri = static_cast<std::size_t>(rit - a.replica_ids[wi].begin());
    if (rit == a.replica_ids[wi].end()) {
      a.replica_ids[wi].push_back(rid);
      a.samples[wi].emplace_back();
    }
    if (!a.samples[wi][ri].emplace(sidx, v).second)
      throw ParseError(row.line, "duplicate sample index " + std::to_string(sidx));
  }
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto& a = acc[t];
    for (std::size_t wi = 0; wi < a.lambdas.size(); ++wi) {
      LambdaWindow w{a.lambdas[wi], {}};
      for (const auto& rep : a.samples[wi]) {
        std::vector<double> xs;
        for (const auto& [i, v] : rep) xs.push_back(v);
        w.replicas.push_back(std::move(xs));
      }
      out[t].windows.push_back(std::move(w));
    }
  }
  return out;
}

void write_ties_csv(std::ostream& out, std::span<const TransformationWindows> data) {
  csv::Writer w(out);
  w.row({"transformation_id", "lambda", "replica_id", "sample_index", "dudl_kcal_mol"});
  for (const auto& t : data)
    for (const auto& win : t.windows)
      for (std::size_t r = 0; r < win.replicas.size(); ++r)
        for (std::size_t i = 0; i < win.replicas[r].size(); ++i) {
          w.field(t.transformation_id)
              .field(win.lambda)
              .field("r" + std::to_string(r))
              .field(i)
              .field(win.replicas[r][i]);
          w.end_row();
        }
}

void write_esmacs_estimates_csv(std::ostream& out,
                                std::span<const NamedEsmacsEstimate> rows) {
  csv::Writer w(out);
  w.row({"compound_id", "dg_kcal_mol", "ci_low", "ci_high", "replicas"});
  for (const auto& r : rows) {
    w.field(r.compound_id)
        .field(r.estimate.dg)
        .field(r.estimate.ci_low)
        .field(r.estimate.ci_high)
        .field(r.estimate.replicas);
    w.end_row();
  }
}

std::vector<NamedEsmacsEstimate> read_esmacs_estimates_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_id = table.column("compound_id"), c_dg = table.column("dg_kcal_mol"),
             c_lo = table.column("ci_low"), c_hi = table.column("ci_high"),
             c_n = table.column("replicas");
  std::vector<NamedEsmacsEstimate> out;
  for (const auto& row : table.rows()) {
    EsmacsEstimate e;
    e.dg = csv::parse_double(row.fields[c_dg], row.line);
    e.ci_low = csv::parse_double(row.fields[c_lo], row.line);
    e.ci_high = csv::parse_double(row.fields[c_hi], row.line);
    e.replicas = static_cast<std::size_t>(csv::parse_int(row.fields[c_n], row.line));
    out.push_back(NamedEsmacsEstimate{row.fields[c_id], e});
  }
  return out;
}

void write_ties_estimates_csv(std::ostream& out, std::span<const NamedTiesEstimate> rows) {
  csv::Writer w(out);
  w.row({"transformation_id", "ddg_kcal_mol", "sigma_kcal_mol", "windows"});
  for (const auto& r : rows) {
    w.field(r.transformation_id)
        .field(r.estimate.ddg)
        .field(r.estimate.sigma)
        .field(r.estimate.windows);
    w.end_row();
  }
}

std::vector<NamedTiesEstimate> read_ties_estimates_csv(std::istream& in) {
  auto table = csv::Table::read(in);
  const auto c_id = table.column("transformation_id"), c_ddg = table.column("ddg_kcal_mol"),
             c_sigma = table.column("sigma_kcal_mol"), c_w = table.column("windows");
  std::vector<NamedTiesEstimate> out;
  for (const auto& row : table.rows()) {
    TiesEstimate e;
    e.ddg = csv::parse_double(row.fields[c_ddg], row.line);
    e.sigma = csv::parse_double(row.fields[c_sigma], row.line);
    e.windows = static_cast<std::size_t>(csv::parse_int(row.fields[c_w], row.line));
    out.push_back(NamedTiesEstimate{row.fields[c_id], e});
  }
  return out;
}

}  // namespace campaign::fe
