#include "wpmec/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "wpmec/errors.hpp"

namespace wpmec {

void validate_config(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("invalid experiment config: " + what);
  };
  need(c.M >= 1, "M must be >= 1");
  need(c.K >= 1, "K must be >= 1");
  need(c.N >= 1, "N must be >= 1");
  need(c.tau > 0.0 && c.B > 0.0 && c.sigma2 > 0.0, "tau, B and sigma2 must be positive");
  need(c.eta > 0.0 && c.eta <= 1.0, "eta must lie in (0, 1]");
  need(c.C0 > 0.0 && c.Ck > 0.0 && c.zeta0 > 0.0 && c.zetak > 0.0, "C0, Ck, zeta0 and zetak must be positive");
  need(std::isfinite(c.pathloss_ref_db) && c.pathloss_exponent >= 0.0, "path loss parameters out of range");
  need(!c.distances.empty(), "distances must not be empty");
  for (double d : c.distances) need(d > 0.0, "distances must be positive");
  need(c.A_min >= 0.0 && c.A_min <= c.A_max, "need 0 <= A_min <= A_max");
  need(c.trials >= 1, "trials must be >= 1");
  need(c.axis == "K" || c.axis == "A_max", "axis must be K or A_max");
  need(!c.values.empty(), "axis values must not be empty");
  need(!c.schemes.empty(), "schemes must not be empty");
  need(c.uplink_model == "mrc" || c.uplink_model == "scalar", "uplink_model must be mrc or scalar");
  need(c.threads >= 1, "threads must be >= 1");
  for (double v : c.values) {
    if (c.axis == "K") {
      need(v >= 1.0 && v == std::floor(v), "K axis values must be positive integers");
    } else {
      need(v >= c.A_min, "A_max axis values must be >= A_min");
    }
  }
}

std::uint64_t trial_seed(std::uint64_t seed, int axis_index, int trial_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(axis_index), static_cast<std::uint32_t>(trial_index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double pathloss(const ExperimentConfig& cfg, double distance) {
  return std::pow(10.0, cfg.pathloss_ref_db / 10.0) * std::pow(distance, -cfg.pathloss_exponent);
}

Instance gen_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(cfg.A_min, cfg.A_max);

  Instance inst;
  auto& p = inst.params;
  p.antennas = cfg.M;
  p.users = cfg.K;
  p.slots = cfg.N;
  p.slot_duration = cfg.tau;
  p.bandwidth = cfg.B;
  p.noise_power = cfg.sigma2;
  p.server_capacitance = cfg.zeta0;
  p.server_cycles_per_bit = cfg.C0;
  p.harvest_efficiency.assign(cfg.K, cfg.eta);
  p.capacitance.assign(cfg.K, cfg.zetak);
  p.cycles_per_bit.assign(cfg.K, cfg.Ck);

  inst.channels.downlink.assign(cfg.K, std::vector<CVector>(cfg.N, CVector(cfg.M)));
  inst.channels.uplink_gain.resize(cfg.K, cfg.N);
  for (int k = 0; k < cfg.K; ++k) {
    const double d = cfg.distances[std::min<std::size_t>(k, cfg.distances.size() - 1)];
    // Circularly symmetric: each of re/im carries half the power.
    const double sd = std::sqrt(pathloss(cfg, d) / 2.0);
    for (int i = 0; i < cfg.N; ++i) {
      CVector& h = inst.channels.downlink[k][i];
      for (int m = 0; m < cfg.M; ++m) {
        const double re = normal(rng);
        const double im = normal(rng);
        h(m) = Complex(sd * re, sd * im);
      }
      double g = 0.0;
      if (cfg.uplink_model == "mrc") {
        for (int m = 0; m < cfg.M; ++m) {
          const double re = normal(rng);
          const double im = normal(rng);
          g += sd * sd * (re * re + im * im);
        }
      } else {
        const double re = normal(rng);
        const double im = normal(rng);
        g = cfg.M * sd * sd * (re * re + im * im);
      }
      inst.channels.uplink_gain(k, i) = g;
    }
  }
  inst.tasks.bits.resize(cfg.K, cfg.N);
  for (int k = 0; k < cfg.K; ++k) {
    for (int i = 0; i < cfg.N; ++i) inst.tasks.bits(k, i) = uniform(rng);
  }
  if (!cfg.final_slot_arrivals) inst.tasks.bits.col(cfg.N - 1).setZero();
  return inst;
}

ExperimentConfig at_axis_value(const ExperimentConfig& cfg, double value) {
  ExperimentConfig c = cfg;
  if (cfg.axis == "K") {
    c.K = static_cast<int>(value);
  } else {
    c.A_max = value;
  }
  return c;
}

const SweepCell* SweepResult::find(double axis_value, Scheme scheme) const {
  for (const auto& c : cells) {
    if (c.axis_value == axis_value && c.scheme == scheme) return &c;
  }
  return nullptr;
}

namespace {

struct TrialOutcome {
  bool ok = false;
  double per_slot = 0.0;
  std::string failure;
};

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, const SweepProgress& progress) {
  validate_config(cfg);
  const int A = static_cast<int>(cfg.values.size());
  const int S = static_cast<int>(cfg.schemes.size());
  const int T = cfg.trials;
  const int total = A * T;
  std::vector<TrialOutcome> out(static_cast<std::size_t>(total) * S);

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  auto work = [&] {
    for (int item = next++; item < total; item = next++) {
      const int a = item / T;
      const int t = item % T;
      const ExperimentConfig c = at_axis_value(cfg, cfg.values[a]);
      const Instance inst = gen_instance(c, trial_seed(cfg.seed, a, t));
      for (int s = 0; s < S; ++s) {
        TrialOutcome& o = out[static_cast<std::size_t>(item) * S + s];
        try {
          const SolveReport rep = solve_scheme(inst, cfg.schemes[s], cfg.solver);
          o.ok = true;
          o.per_slot = rep.primal_objective / c.N;
        } catch (const std::exception& e) {
          o.failure = "trial " + std::to_string(t) + ": " + e.what();
        }
      }
      const int finished = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(finished, total);
      }
    }
  };
  const int threads = std::min(cfg.threads, std::max(1, total));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  // Reduction in trial order, so the result does not depend on scheduling.
  SweepResult res;
  res.axis_name = cfg.axis;
  for (int a = 0; a < A; ++a) {
    for (int s = 0; s < S; ++s) {
      SweepCell cell;
      cell.axis_value = cfg.values[a];
      cell.scheme = cfg.schemes[s];
      double sum = 0.0;
      for (int t = 0; t < T; ++t) {
        const TrialOutcome& o = out[static_cast<std::size_t>(a * T + t) * S + s];
        if (o.ok) {
          ++cell.n_ok;
          sum += o.per_slot;
        } else {
          ++cell.n_infeasible;
          cell.failures.push_back(o.failure);
        }
      }
      if (cell.n_ok > 0) {
        cell.mean_j_per_slot = sum / cell.n_ok;
        double ss = 0.0;
        for (int t = 0; t < T; ++t) {
          const TrialOutcome& o = out[static_cast<std::size_t>(a * T + t) * S + s];
          if (o.ok) ss += (o.per_slot - cell.mean_j_per_slot) * (o.per_slot - cell.mean_j_per_slot);
        }
        cell.stderr_j_per_slot = cell.n_ok > 1 ? std::sqrt(ss / (cell.n_ok - 1) / cell.n_ok) : 0.0;
      } else {
        cell.mean_j_per_slot = std::numeric_limits<double>::quiet_NaN();
      }
      res.cells.push_back(std::move(cell));
    }
  }
  return res;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError("sweep csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::string sweep_csv(const SweepResult& result) {
  std::string out = "axis_name,axis_value,scheme,mean_J_per_slot,stderr,n_ok,n_infeasible\n";
  for (const auto& c : result.cells) {
    out += result.axis_name + "," + fmt17(c.axis_value) + "," + to_string(c.scheme) + "," +
           fmt17(c.mean_j_per_slot) + "," + fmt17(c.stderr_j_per_slot) + "," + std::to_string(c.n_ok) + "," +
           std::to_string(c.n_infeasible) + "\n";
  }
  return out;
}

SweepResult parse_sweep_csv(const std::string& text) {
  SweepResult res;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  bool header = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line.rfind("axis_name,", 0) != 0) throw ParseError("sweep csv line 1: missing header");
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) throw ParseError("sweep csv line " + std::to_string(line_no) + ": expected 7 fields");
    if (res.cells.empty()) res.axis_name = f[0];
    SweepCell c;
    c.axis_value = parse_double(f[1], line_no);
    try {
      c.scheme = parse_scheme(f[2]);
    } catch (const Error& e) {
      throw ParseError("sweep csv line " + std::to_string(line_no) + ": " + e.what());
    }
    c.mean_j_per_slot = parse_double(f[3], line_no);
    c.stderr_j_per_slot = parse_double(f[4], line_no);
    c.n_ok = static_cast<int>(parse_double(f[5], line_no));
    c.n_infeasible = static_cast<int>(parse_double(f[6], line_no));
    res.cells.push_back(c);
  }
  if (header) throw ParseError("sweep csv: empty input");
  return res;
}

std::string sweep_svg(const SweepResult& result, bool log_y) {
  const double W = 640, H = 420, left = 80, right = 150, top = 30, bottom = 60;
  std::vector<double> xs;
  std::vector<Scheme> schemes;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& c : result.cells) {
    if (std::find(xs.begin(), xs.end(), c.axis_value) == xs.end()) xs.push_back(c.axis_value);
    if (std::find(schemes.begin(), schemes.end(), c.scheme) == schemes.end()) schemes.push_back(c.scheme);
    const double y = c.mean_j_per_slot;
    if (std::isfinite(y) && (!log_y || y > 0.0)) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  std::sort(xs.begin(), xs.end());
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  double y0 = std::isfinite(ymin) ? ty(ymin) : 0.0;
  double y1 = std::isfinite(ymax) ? ty(ymax) : 1.0;
  if (!log_y) y0 = std::min(0.0, y0);
  if (y1 <= y0) y1 = y0 + 1.0;
  const double x0 = xs.empty() ? 0.0 : xs.front();
  double x1 = xs.empty() ? 1.0 : xs.back();
  if (x1 <= x0) x1 = x0 + 1.0;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (ty(y) - y0) / (y1 - y0) * (H - top - bottom); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
     << "\" stroke=\"black\"/>\n";
  for (double x : xs) {
    os << "<text x=\"" << px(x) << "\" y=\"" << H - bottom + 18 << "\" font-size=\"12\" text-anchor=\"middle\">"
       << fmt17(x) << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double v = y0 + (y1 - y0) * t / 4.0;
    const double shown = log_y ? std::pow(10.0, v) : v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", shown);
    const double yy = H - bottom - (H - top - bottom) * t / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << yy + 4 << "\" font-size=\"12\" text-anchor=\"end\">" << buf
       << "</text>\n";
  }
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 15 << "\" font-size=\"13\" text-anchor=\"middle\">"
     << result.axis_name << "</text>\n";
  os << "<text x=\"18\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" "
     << "transform=\"rotate(-90 18 " << (top + H - bottom) / 2 << ")\">energy per slot (J)</text>\n";
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const char* color = colors[s % 6];
    std::string pts;
    for (double x : xs) {
      const SweepCell* c = result.find(x, schemes[s]);
      if (!c || !std::isfinite(c->mean_j_per_slot) || (log_y && c->mean_j_per_slot <= 0.0)) continue;
      pts += fmt17(px(x)) + "," + fmt17(py(c->mean_j_per_slot)) + " ";
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(c->mean_j_per_slot) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts << "\"/>\n";
    const double ly = top + 10 + 20.0 * s;
    os << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - right + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << to_string(schemes[s])
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_outputs(const SweepResult& result, const std::string& out_dir, bool log_y) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << body;
    if (!f) throw IoError("write failed: " + path.string());
  };
  write("sweep.csv", sweep_csv(result));
  write("sweep.svg", sweep_svg(result, log_y));
}

}  // namespace wpmec
