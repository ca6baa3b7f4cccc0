#include "experiments/runner.hpp"

#include "fchern/error.hpp"
#include "fchern/parallel.hpp"
#include "fchern/propagator.hpp"
#include "fchern/topology.hpp"
#include "fchern/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#ifndef FCHERN_VERSION
#define FCHERN_VERSION "0.0.0"
#endif

namespace fchern::cli {

const char* const kVersion = FCHERN_VERSION;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

namespace fs = std::filesystem;
using Row = std::vector<std::string>;
using Clock = std::chrono::steady_clock;

constexpr double kClosedGap = 1e-7;

std::string rational_text(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

std::string tau_label(double tau) { return "tau=" + format_double(tau); }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Rows are accepted from any thread but written strictly in index order.
class OrderedCsv {
 public:
  OrderedCsv(const fs::path& path, const Row& header) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw ConfigError("cannot open " + path.string() + " for writing");
    write(header);
  }

  void submit(std::size_t index, std::vector<Row> rows) {
    std::lock_guard lock(mutex_);
    pending_[index] = std::move(rows);
    while (!pending_.empty() && pending_.begin()->first == next_) {
      for (const Row& r : pending_.begin()->second) write(r);
      pending_.erase(pending_.begin());
      ++next_;
    }
    out_.flush();
  }

  void close() {
    out_.close();
    if (!out_) throw NumericalError("failed writing " + path_.string());
  }

  std::size_t rows() const { return rows_; }

 private:
  void write(const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out_ << (i ? "," : "") << r[i];
    out_ << '\n';
    ++rows_;
  }

  fs::path path_;
  std::ofstream out_;
  std::mutex mutex_;
  std::map<std::size_t, std::vector<Row>> pending_;
  std::size_t next_ = 0;
  std::size_t rows_ = 0;  // header included
};

struct RunLog {
  std::mutex mutex;
  std::map<std::size_t, std::vector<std::string>> warnings;
  std::map<std::size_t, std::vector<std::string>> notes;
  std::map<std::size_t, std::pair<std::string, double>> timings;

  void warn(std::size_t i, std::string s) {
    std::lock_guard lock(mutex);
    warnings[i].push_back(std::move(s));
  }
  void note(std::size_t i, std::string s) {
    std::lock_guard lock(mutex);
    notes[i].push_back(std::move(s));
  }
  void time(std::size_t i, std::string label, double seconds) {
    std::lock_guard lock(mutex);
    timings[i] = {std::move(label), seconds};
  }
};

struct Context {
  const ExperimentConfig& cfg;
  OrderedCsv& csv;
  RunLog& log;
  std::ostream* progress;
  std::mutex progress_mutex;

  void report(const std::string& label, double seconds) {
    if (!progress) return;
    std::lock_guard lock(progress_mutex);
    *progress << "  " << label << "  (" << seconds << " s)\n" << std::flush;
  }
};

// Evaluates one grid point, attaching its label to numerical failures.
template <typename F>
auto at_point(const std::string& label, F&& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    throw NumericalError("at " + label + ": " + e.what());
  }
}

template <typename F>
void for_points(Context& ctx, const std::vector<std::string>& labels, F compute) {
  parallel_for(labels.size(), [&](std::size_t i) {
    const auto t0 = Clock::now();
    std::vector<Row> rows = at_point(labels[i], [&] { return compute(i); });
    const double dt = seconds_since(t0);
    ctx.log.time(i, labels[i], dt);
    ctx.csv.submit(i, std::move(rows));
    ctx.report(labels[i], dt);
  });
}

std::vector<int> selected_bands(const ExperimentConfig& cfg, int dim) {
  if (cfg.band) return {*cfg.band};
  std::vector<int> bands(static_cast<std::size_t>(dim));
  for (int b = 0; b < dim; ++b) bands[static_cast<std::size_t>(b)] = b;
  return bands;
}

int model_dim(const ExperimentConfig& cfg) { return cfg.model.has_family() ? cfg.model.family().dim : 2; }

std::vector<std::string> tau_labels(const std::vector<double>& taus) {
  std::vector<std::string> labels;
  for (double t : taus) labels.push_back(tau_label(t));
  return labels;
}

// ---------------------------------------------------------------- headers

Row header_for(const ExperimentConfig& cfg) {
  const int dim = model_dim(cfg);
  Row h;
  switch (cfg.experiment) {
    case Experiment::transport_sweep:
      h = {"tau"};
      for (int b : selected_bands(cfg, dim)) h.push_back("q_band" + std::to_string(b));
      h.insert(h.end(), {"k_nodes", "s_steps", "k_converged"});
      break;
    case Experiment::floquet_gaps:
      h = {"tau", "gap_0", "gap_pi", "argmin_k_0", "argmin_k_pi", "refined"};
      break;
    case Experiment::floquet_bands:
      h = {"tau", "k"};
      for (int b = 0; b < dim; ++b) h.push_back("e" + std::to_string(b));
      for (int b = 0; b < dim; ++b) h.push_back("unwrapped" + std::to_string(b));
      break;
    case Experiment::winding_sweep:
      h = {"tau", "order"};
      for (int b = 0; b < dim; ++b) h.push_back("winding" + std::to_string(b));
      if (cfg.floquet_chern) {
        for (int b = 0; b < dim; ++b) h.push_back("floquet_chern" + std::to_string(b));
      }
      h.push_back("winding_sum");
      break;
    case Experiment::chern_static:
      h = {"band", "chern"};
      break;
    case Experiment::longtime:
      h = {"tau", "k", "band", "floquet_average", "cesaro_average", "abs_difference"};
      break;
    case Experiment::enclosure:
      h = {"band", "winding"};
      break;
  }
  return h;
}

// ------------------------------------------------------------ experiments

void transport_sweep(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ModelFamily family = cfg.model.family();
  const DriveSchedule schedule = cfg.drive == "pulse" ? family.pulse_schedule()
                                                      : DriveSchedule::smooth_pulse(family.drive_offset());
  const std::vector<int> bands = selected_bands(cfg, family.dim);
  const std::vector<double> taus = cfg.tau_grid->values();
  TransportOptions options;
  options.k_points = cfg.k_points;
  options.tol = cfg.tol;
  for_points(ctx, tau_labels(taus), [&](std::size_t i) {
    Row row{format_double(taus[i])};
    long steps = 0;
    int nodes = 0;
    bool converged = true;
    for (int b : bands) {
      const TransportResult r = charge_transport(family, schedule, taus[i], b, options);
      row.push_back(format_double(r.q_value));
      steps = std::max(steps, r.s_steps);
      nodes = r.k_points;
      if (!r.k_converged) {
        converged = false;
        ctx.log.warn(i, tau_label(taus[i]) + " band " + std::to_string(b) +
                            ": k quadrature not converged, |Q - Q_coarse| = " +
                            format_double(std::abs(r.q_value - r.coarse_q)));
      }
    }
    row.insert(row.end(), {std::to_string(nodes), std::to_string(steps), converged ? "1" : "0"});
    return std::vector<Row>{row};
  });
}

struct GapPoint {
  double tau = 0.0;
  GapReport zero;
  GapReport pi;
  bool refined = false;
  double seconds = 0.0;
  std::size_t flags = 0;
};

GapPoint gap_point(const FloquetField& field, double tau, int k_points) {
  const auto t0 = Clock::now();
  const FloquetMap map = [field, tau](double k) { return field(tau, k); };
  BandSet bands = track_bands(map, k_points);
  bands.tau = tau;
  GapPoint p;
  p.tau = tau;
  p.zero = min_gap(bands, 0.0);
  p.pi = min_gap(bands, kPi);
  p.flags = bands.crossing_flags.size();
  p.seconds = seconds_since(t0);
  return p;
}

const GapReport& report_of(const GapPoint& p, int target) { return target == 0 ? p.zero : p.pi; }

double window_stat(const std::vector<GapPoint>& pts, int target, std::size_t i, bool median) {
  const std::size_t lo = i >= 8 ? i - 8 : 0;
  const std::size_t hi = std::min(pts.size(), i + 10);
  std::vector<double> v;
  for (std::size_t j = lo; j < hi; ++j) v.push_back(report_of(pts[j], target).min_gap);
  if (!median) return *std::min_element(v.begin(), v.end());
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

void floquet_gaps(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const FloquetField field = cfg.model.floquet(cfg.tol);
  const TauGrid& grid = *cfg.tau_grid;

  std::vector<GapPoint> pts;
  std::size_t computed = 0;
  auto evaluate = [&](const std::vector<double>& taus) {
    std::vector<GapPoint> fresh(taus.size());
    parallel_for(taus.size(), [&](std::size_t i) {
      fresh[i] = at_point(tau_label(taus[i]), [&] { return gap_point(field, taus[i], cfg.k_points); });
      ctx.report(tau_label(taus[i]), fresh[i].seconds);
    });
    for (const GapPoint& p : fresh) {
      ctx.log.time(computed++, tau_label(p.tau), p.seconds);
      pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end(), [](const GapPoint& a, const GapPoint& b) { return a.tau < b.tau; });
  };
  evaluate(grid.values());

  if (grid.spacing == Spacing::adaptive) {
    const std::size_t target_points = static_cast<std::size_t>(grid.points);
    const double min_width = 1e-6 * (grid.max - grid.min);
    while (pts.size() < target_points) {
      // Intervals next to points within 10x of the local minimum, ranked by
      // depth relative to the local median so narrow dips are filled first.
      std::vector<std::pair<double, std::size_t>> ranked;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1].tau - pts[i].tau < min_width) continue;
        double score = 1e300;
        for (int target : {0, 1}) {
          const double g = std::min(report_of(pts[i], target).min_gap, report_of(pts[i + 1], target).min_gap);
          if (g < 10.0 * window_stat(pts, target, i, false)) {
            score = std::min(score, g / std::max(window_stat(pts, target, i, true), 1e-300));
          }
        }
        if (score < 1e300) ranked.emplace_back(score, i);
      }
      if (ranked.empty()) {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) ranked.emplace_back(pts[i].tau - pts[i + 1].tau, i);
      }
      std::sort(ranked.begin(), ranked.end());
      const std::size_t remaining = target_points - pts.size();
      const std::size_t batch = std::min({ranked.size(), remaining, std::max<std::size_t>(1, (remaining + 2) / 3)});
      std::vector<double> mids;
      for (std::size_t r = 0; r < batch; ++r) {
        const std::size_t i = ranked[r].second;
        mids.push_back(0.5 * (pts[i].tau + pts[i + 1].tau));
      }
      evaluate(mids);
    }
  }

  // Polish the deepest minima in tau: nested golden-section search, in k
  // near the coarse argmin and then in tau between the neighbouring points.
  const double k_step = kTwoPi / cfg.k_points;
  std::vector<GapPoint> extra;
  for (int target : {0, 1}) {
    const double phase = target == 0 ? 0.0 : kPi;
    std::vector<std::pair<double, std::size_t>> minima;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double g = report_of(pts[i], target).min_gap;
      const bool left_ok = i == 0 || g <= report_of(pts[i - 1], target).min_gap;
      const bool right_ok = i + 1 == pts.size() || g <= report_of(pts[i + 1], target).min_gap;
      if (!left_ok || !right_ok || pts.size() < 3) continue;
      const double depth = g / std::max(window_stat(pts, target, i, true), 1e-300);
      if (depth < 0.5) minima.emplace_back(depth, i);
    }
    std::sort(minima.begin(), minima.end());
    if (minima.size() > static_cast<std::size_t>(cfg.refine_minima)) minima.resize(static_cast<std::size_t>(cfg.refine_minima));
    for (const auto& [depth, i] : minima) {
      const double t_lo = pts[i == 0 ? 0 : i - 1].tau;
      const double t_hi = pts[std::min(pts.size() - 1, i + 1)].tau;
      const double k0 = report_of(pts[i], target).argmin_k;
      const auto t0 = Clock::now();
      const std::string label = "refine " + std::string(target == 0 ? "gap_0" : "gap_pi") + " near " + tau_label(pts[i].tau);
      GapPoint p = at_point(label, [&] {
        double best_k = k0;
        auto gap_at = [&](double tau) {
          const auto probe = [&](double k) { return gap_around(unitary_eig(field(tau, k)).values, phase); };
          const double k = golden_section_minimize(probe, k0 - 2 * k_step, k0 + 2 * k_step, 1e-10);
          best_k = k;
          return probe(k);
        };
        const double tau = golden_section_minimize(gap_at, t_lo, t_hi, 1e-9 * std::max(1.0, t_hi));
        const double local = gap_at(tau);
        GapPoint q = gap_point(field, tau, cfg.k_points);
        GapReport& r = target == 0 ? q.zero : q.pi;
        if (local < r.min_gap) {
          r.min_gap = local;
          r.argmin_k = std::fmod(best_k + kTwoPi, kTwoPi);
        }
        q.refined = true;
        return q;
      });
      p.seconds = seconds_since(t0);
      ctx.log.time(computed, label, p.seconds);
      ctx.log.note(computed, label + ": tau=" + format_double(p.tau) + " gap=" +
                                 format_double(report_of(p, target).min_gap));
      ++computed;
      ctx.report(label, p.seconds);
      extra.push_back(p);
    }
  }
  pts.insert(pts.end(), extra.begin(), extra.end());
  std::stable_sort(pts.begin(), pts.end(), [](const GapPoint& a, const GapPoint& b) { return a.tau < b.tau; });

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const GapPoint& p = pts[i];
    for (int target : {0, 1}) {
      if (report_of(p, target).min_gap < kClosedGap) {
        ctx.log.warn(i, tau_label(p.tau) + ": gap at " + (target == 0 ? "0" : "pi") +
                            " numerically closed (" + format_double(report_of(p, target).min_gap) + ")");
      }
    }
    ctx.csv.submit(i, {{format_double(p.tau), format_double(p.zero.min_gap), format_double(p.pi.min_gap),
                        format_double(p.zero.argmin_k), format_double(p.pi.argmin_k), p.refined ? "1" : "0"}});
  }
}

void floquet_bands(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const FloquetField field = cfg.model.floquet(cfg.tol);
  const std::vector<double> taus = cfg.tau_grid->values();
  for_points(ctx, tau_labels(taus), [&](std::size_t i) {
    const double tau = taus[i];
    BandSet bands = track_bands([&](double k) { return field(tau, k); }, cfg.k_points);
    bands.tau = tau;
    std::vector<Row> rows;
    for (std::size_t j = 0; j < bands.k_grid.size(); ++j) {
      Row row{format_double(tau), format_double(bands.k_grid[j])};
      for (int b = 0; b < bands.dim(); ++b) row.push_back(format_double(wrap_phase(bands.quasienergy[static_cast<std::size_t>(b)][j])));
      for (int b = 0; b < bands.dim(); ++b) row.push_back(format_double(bands.quasienergy[static_cast<std::size_t>(b)][j]));
      rows.push_back(std::move(row));
    }
    std::ostringstream note;
    note << tau_label(tau) << ": N=" << bands.order << " windings=";
    const auto w = winding_numbers(bands);
    for (std::size_t b = 0; b < w.size(); ++b) note << (b ? "," : "") << rational_text(w[b]);
    note << " nodes=" << bands.k_grid.size() << " crossing_flags=" << bands.crossing_flags.size();
    ctx.log.note(i, note.str());
    for (const CrossingFlag& f : bands.crossing_flags) {
      ctx.log.warn(i, tau_label(tau) + ": ambiguous band matching at k=" + format_double(f.k) +
                          " (phase separation " + format_double(f.gap) + ")");
    }
    return rows;
  });
}

void winding_sweep(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const FloquetField field = cfg.model.floquet(cfg.tol);
  const std::vector<double> taus = cfg.tau_grid->values();
  for_points(ctx, tau_labels(taus), [&](std::size_t i) {
    const double tau = taus[i];
    BandSet bands = track_bands([&](double k) { return field(tau, k); }, cfg.k_points);
    bands.tau = tau;
    const auto w = winding_numbers(bands);
    Row row{format_double(tau), std::to_string(bands.order)};
    Rational sum(0);
    for (const Rational& r : w) {
      row.push_back(rational_text(r));
      sum = sum + r;
    }
    if (cfg.floquet_chern) {
      const ModelFamily family = cfg.model.family();
      for (int b = 0; b < bands.dim(); ++b) {
        const Rational c = floquet_chern(family, bands, b, 0, cfg.tol);
        row.push_back(rational_text(c));
        if (!(c == w[static_cast<std::size_t>(b)])) {
          ctx.log.warn(i, tau_label(tau) + " band " + std::to_string(b) + ": Floquet Chern " +
                              rational_text(c) + " differs from winding " + rational_text(w[static_cast<std::size_t>(b)]));
        }
      }
    }
    row.push_back(rational_text(sum));
    for (const CrossingFlag& f : bands.crossing_flags) {
      ctx.log.warn(i, tau_label(tau) + ": ambiguous band matching at k=" + format_double(f.k));
    }
    return std::vector<Row>{row};
  });
}

void chern_static_run(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ModelFamily family = cfg.model.family();
  for_points(ctx, {cfg.model.describe()}, [&](std::size_t) {
    std::vector<Row> rows;
    if (cfg.band) {
      rows.push_back({std::to_string(*cfg.band), std::to_string(chern_static(family, *cfg.band, cfg.grid))});
    } else {
      const std::vector<int> c = chern_static_all(family, cfg.grid);
      for (std::size_t b = 0; b < c.size(); ++b) rows.push_back({std::to_string(b), std::to_string(c[b])});
    }
    return rows;
  });
}

void longtime(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const ModelFamily family = cfg.model.family();
  const std::vector<int> bands = selected_bands(cfg, family.dim);
  const std::vector<double> taus = cfg.tau_grid->values();
  const double phi0 = family.periodic_schedule().phi(0.0);
  for_points(ctx, tau_labels(taus), [&](std::size_t i) {
    const ComplexMatrix f = floquet_operator(family, taus[i], cfg.k, cfg.tol);
    const ComplexMatrix current = family.evaluate_dk(phi0, cfg.k);
    const EigenSystem initial = hermitian_eig(family.evaluate(phi0, cfg.k));
    std::vector<Row> rows;
    for (int b : bands) {
      const ComplexVector psi = initial.vectors.col(b);
      const double exact = floquet_longtime_average(f, current, psi);
      const double cesaro = cesaro_time_average(f, current, psi, cfg.cesaro_steps);
      rows.push_back({format_double(taus[i]), format_double(cfg.k), std::to_string(b), format_double(exact),
                      format_double(cesaro), format_double(std::abs(exact - cesaro))});
    }
    return rows;
  });
}

void enclosure(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const FloquetField field = cfg.model.floquet(cfg.tol);
  std::ostringstream label;
  label << "loop centre (" << format_double(cfg.center_tau) << ", " << format_double(cfg.center_k)
        << ") radius " << format_double(cfg.radius);
  for_points(ctx, {label.str()}, [&](std::size_t) {
    const auto w = enclosure_winding(field, cfg.center_tau, cfg.center_k, cfg.radius, cfg.loop_points);
    std::vector<Row> rows;
    for (std::size_t b = 0; b < w.size(); ++b) rows.push_back({std::to_string(b), rational_text(w[b])});
    return rows;
  });
}

// ---------------------------------------------------------- plot scripts

std::string plot_script(const ExperimentConfig& cfg, const std::string& csv_name) {
  std::ostringstream py;
  py << "# Renders " << csv_name << "; run from the output directory.\n"
     << "import csv\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
     << "with open('" << csv_name << "') as f:\n    rows = list(csv.DictReader(f))\n"
     << "cols = list(rows[0].keys()) if rows else []\n\n"
     << "def frac(x):\n    p, _, q = x.partition('/')\n    return float(p) / float(q or 1)\n\n";
  const std::string stem = to_string(cfg.experiment);
  switch (cfg.experiment) {
    case Experiment::transport_sweep:
      py << "tau = [float(r['tau']) for r in rows]\n"
         << "for c in [c for c in cols if c.startswith('q_band')]:\n"
         << "    plt.plot(tau, [float(r[c]) for r in rows], '.-', label=c)\n"
         << "plt.xscale('log')\nplt.xlabel('tau')\nplt.ylabel('Q')\nplt.legend()\n";
      break;
    case Experiment::floquet_gaps:
      py << "tau = [float(r['tau']) for r in rows]\n"
         << "for c, lab in (('gap_0', 'gap at E=0'), ('gap_pi', 'gap at E=pi')):\n"
         << "    plt.plot(tau, [max(float(r[c]), 1e-16) for r in rows], '.-', label=lab)\n"
         << "plt.yscale('log')\nplt.xlabel('tau')\nplt.ylabel('minimal quasienergy gap')\nplt.legend()\n";
      break;
    case Experiment::floquet_bands:
      py << "import math\ntaus = sorted({r['tau'] for r in rows}, key=float)\n"
         << "fig, axes = plt.subplots(1, len(taus), figsize=(5 * len(taus), 4), squeeze=False)\n"
         << "for ax, t in zip(axes[0], taus):\n"
         << "    sel = [r for r in rows if r['tau'] == t]\n"
         << "    ks = [float(r['k']) - (2 * math.pi if float(r['k']) > math.pi else 0) for r in sel]\n"
         << "    for c in [c for c in cols if c.startswith('e')]:\n"
         << "        ax.plot(ks, [float(r[c]) for r in sel], marker='.', markersize=1, linestyle='none')\n"
         << "    ax.set_title('tau = ' + t)\n    ax.set_xlabel('k')\n    ax.set_ylabel('E')\n";
      break;
    case Experiment::winding_sweep:
      py << "tau = [float(r['tau']) for r in rows]\n"
         << "for c in [c for c in cols if c.startswith('winding') and c != 'winding_sum']:\n"
         << "    plt.step(tau, [frac(r[c]) for r in rows], where='mid', label=c)\n"
         << "plt.xlabel('tau')\nplt.ylabel('winding')\nplt.legend()\n";
      break;
    case Experiment::chern_static:
    case Experiment::enclosure:
      py << "value = cols[1]\nplt.bar([r['band'] for r in rows], [frac(r[value]) for r in rows])\n"
         << "plt.xlabel('band')\nplt.ylabel(value)\n";
      break;
    case Experiment::longtime:
      py << "tau = [float(r['tau']) for r in rows]\n"
         << "plt.plot(tau, [float(r['floquet_average']) for r in rows], 'o', label='Floquet states')\n"
         << "plt.plot(tau, [float(r['cesaro_average']) for r in rows], 'x', label='Cesaro mean')\n"
         << "plt.xlabel('tau')\nplt.ylabel('<I>')\nplt.legend()\n";
      break;
  }
  py << "plt.tight_layout()\nplt.savefig('" << stem << ".png', dpi=150)\n";
  return py.str();
}

void write_manifest(const fs::path& path, const ExperimentConfig& cfg, RunLog& log, const RunSummary& summary,
                    double total_seconds) {
  std::ofstream out(path, std::ios::trunc);
  out << "fchern " << kVersion << "\n"
      << "experiment: " << to_string(cfg.experiment) << "\n"
      << "model: " << cfg.model.describe() << "\n"
      << "threads: " << worker_count() << "\n"
      << "csv: " << summary.csv.filename().string() << " (" << summary.rows << " data rows)\n";
  if (summary.plot) out << "plot: " << summary.plot->filename().string() << "\n";
  out << "total_wall_seconds: " << total_seconds << "\n\n[config]\n";
  for (const SettingRecord& s : cfg.settings) {
    out << s.key << " = " << s.value << "    # " << s.source;
    if (s.shadowed_file_value) out << "; overrides file value " << *s.shadowed_file_value;
    out << "\n";
  }
  out << "\n[points]\n";
  for (const auto& [i, t] : log.timings) out << t.first << "  wall_seconds=" << t.second << "\n";
  out << "\n[results]\n";
  for (const auto& [i, notes] : log.notes) {
    for (const auto& n : notes) out << n << "\n";
  }
  out << "\n[warnings]\n";
  if (summary.warnings.empty()) out << "none\n";
  for (const auto& w : summary.warnings) out << w << "\n";
  if (!out) throw NumericalError("failed writing " + path.string());
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  const auto t0 = Clock::now();
  const std::string stem = to_string(cfg.experiment);
  RunSummary summary;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw ConfigError("cannot create out_dir '" + cfg.out_dir + "': " + ec.message());
  summary.csv = fs::path(cfg.out_dir) / (stem + ".csv");
  summary.manifest = fs::path(cfg.out_dir) / "manifest.txt";
  fs::remove(summary.manifest, ec);

  RunLog log;
  try {
    OrderedCsv csv(summary.csv, header_for(cfg));
    Context ctx{cfg, csv, log, progress, {}};
    switch (cfg.experiment) {
      case Experiment::transport_sweep: transport_sweep(ctx); break;
      case Experiment::floquet_gaps: floquet_gaps(ctx); break;
      case Experiment::floquet_bands: floquet_bands(ctx); break;
      case Experiment::winding_sweep: winding_sweep(ctx); break;
      case Experiment::chern_static: chern_static_run(ctx); break;
      case Experiment::longtime: longtime(ctx); break;
      case Experiment::enclosure: enclosure(ctx); break;
    }
    csv.close();
    summary.rows = csv.rows() - 1;
  } catch (...) {
    fs::remove(summary.csv, ec);
    throw;
  }

  for (const auto& [i, warnings] : log.warnings) {
    summary.warnings.insert(summary.warnings.end(), warnings.begin(), warnings.end());
  }
  if (cfg.emit_plot) {
    summary.plot = fs::path(cfg.out_dir) / ("plot_" + stem + ".py");
    std::ofstream(*summary.plot, std::ios::trunc) << plot_script(cfg, summary.csv.filename().string());
  }
  write_manifest(summary.manifest, cfg, log, summary, seconds_since(t0));
  return summary;
}

}  // namespace fchern::cli
