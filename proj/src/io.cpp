#include "wpmec/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wpmec/errors.hpp"

namespace wpmec {

using nlohmann::json;

namespace {

json parse_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Locate the byte offset reported by the parser.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto pos = msg.find("syntax error");
    if (pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(std::string(what) + ": line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                     msg);
  }
}

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("expected an object at " + (path.empty() ? "/" : path));
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field " + child(path, key));
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError("expected a number at " + path);
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError("expected an integer at " + path);
  return v.get<int>();
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError("expected an array at " + path);
  return v;
}

// A per-user entry is either one number for every user or a list.
std::vector<double> per_user(const json& v, const std::string& path, int K) {
  if (v.is_number()) return std::vector<double>(std::max(K, 0), v.get<double>());
  std::vector<double> out;
  const json& a = array(v, path);
  for (std::size_t k = 0; k < a.size(); ++k) out.push_back(number(a[k], child(path, k)));
  return out;
}

RMatrix matrix(const json& v, const std::string& path) {
  const json& rows = array(v, path);
  if (rows.empty()) return RMatrix(0, 0);
  const std::size_t cols = array(rows[0], child(path, 0)).size();
  RMatrix out(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json& row = array(rows[r], child(path, r));
    if (row.size() != cols)
      throw ParseError("ragged array at " + child(path, r) + ": " + std::to_string(row.size()) + " entries, row 0 has " +
                       std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = number(row[c], child(child(path, r), c));
  }
  return out;
}

Complex complex_value(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) throw ParseError("expected [re, im] at " + path);
  return {number(v[0], child(path, 0)), number(v[1], child(path, 1))};
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const RVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

json mat_json(const RMatrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

json cmat_json(const CMatrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    a.push_back(row);
  }
  return a;
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) throw ParseError("unknown field " + child(path, it.key()));
  }
}

}  // namespace

Instance instance_from_json(const std::string& text) {
  const json doc = parse_text(text, "instance");
  Instance inst;
  auto& p = inst.params;
  const json& jp = field(doc, "params", "");
  p.antennas = integer(field(jp, "M", "/params"), "/params/M");
  p.users = integer(field(jp, "K", "/params"), "/params/K");
  p.slots = integer(field(jp, "N", "/params"), "/params/N");
  p.slot_duration = number(field(jp, "tau", "/params"), "/params/tau");
  p.bandwidth = number(field(jp, "B", "/params"), "/params/B");
  p.noise_power = number(field(jp, "sigma2", "/params"), "/params/sigma2");
  p.server_capacitance = number(field(jp, "zeta0", "/params"), "/params/zeta0");
  p.server_cycles_per_bit = number(field(jp, "C0", "/params"), "/params/C0");
  p.harvest_efficiency = per_user(field(jp, "eta_k", "/params"), "/params/eta_k", p.users);
  p.capacitance = per_user(field(jp, "zeta_k", "/params"), "/params/zeta_k", p.users);
  p.cycles_per_bit = per_user(field(jp, "C_k", "/params"), "/params/C_k", p.users);

  const json& jc = field(doc, "channels", "");
  const json& h = array(field(jc, "h", "/channels"), "/channels/h");
  for (std::size_t k = 0; k < h.size(); ++k) {
    const std::string pk = child("/channels/h", k);
    const json& slots = array(h[k], pk);
    std::vector<CVector> row;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const std::string pi = child(pk, i);
      const json& entries = array(slots[i], pi);
      CVector v(entries.size());
      for (std::size_t m = 0; m < entries.size(); ++m) v(m) = complex_value(entries[m], child(pi, m));
      row.push_back(v);
    }
    inst.channels.downlink.push_back(std::move(row));
  }
  inst.channels.uplink_gain = matrix(field(jc, "g", "/channels"), "/channels/g");
  inst.tasks.bits = matrix(field(field(doc, "tasks", ""), "A", "/tasks"), "/tasks/A");
  return inst;
}

std::string instance_to_json(const Instance& inst, int indent) {
  const auto& p = inst.params;
  json doc;
  doc["params"] = {{"M", p.antennas},      {"K", p.users},           {"N", p.slots},
                   {"tau", p.slot_duration}, {"B", p.bandwidth},      {"sigma2", p.noise_power},
                   {"zeta0", p.server_capacitance}, {"C0", p.server_cycles_per_bit},
                   {"eta_k", p.harvest_efficiency}, {"zeta_k", p.capacitance}, {"C_k", p.cycles_per_bit}};
  json h = json::array();
  for (const auto& user : inst.channels.downlink) {
    json slots = json::array();
    for (const auto& v : user) {
      json entries = json::array();
      for (Eigen::Index m = 0; m < v.size(); ++m) entries.push_back(complex_json(v(m)));
      slots.push_back(entries);
    }
    h.push_back(slots);
  }
  doc["channels"] = {{"h", h}, {"g", mat_json(inst.channels.uplink_gain)}};
  doc["tasks"] = {{"A", mat_json(inst.tasks.bits)}};
  return doc.dump(indent);
}

ExperimentConfig config_from_json(const std::string& text) {
  const json doc = parse_text(text, "config");
  if (!doc.is_object()) throw ParseError("config: expected an object at /");
  static const std::set<std::string> known{
      "M",      "K",      "N",     "tau",  "B",      "sigma2",  "eta",        "C0",         "Ck",
      "zeta0",  "zetak",  "pathloss_ref_db", "pathloss_exponent", "distances", "A_min", "A_max",
      "final_slot_arrivals", "uplink_model", "trials", "seed", "axis", "values", "schemes", "log_y",
      "threads", "solver"};
  reject_unknown(doc, known, "");
  ExperimentConfig c;
  auto opt_num = [&](const char* key, double& dst) {
    if (doc.contains(key)) dst = number(doc[key], child("", key));
  };
  auto opt_int = [&](const char* key, int& dst) {
    if (doc.contains(key)) dst = integer(doc[key], child("", key));
  };
  opt_int("M", c.M);
  opt_int("K", c.K);
  opt_int("N", c.N);
  opt_num("tau", c.tau);
  opt_num("B", c.B);
  opt_num("sigma2", c.sigma2);
  opt_num("eta", c.eta);
  opt_num("C0", c.C0);
  opt_num("Ck", c.Ck);
  opt_num("zeta0", c.zeta0);
  opt_num("zetak", c.zetak);
  opt_num("pathloss_ref_db", c.pathloss_ref_db);
  opt_num("pathloss_exponent", c.pathloss_exponent);
  opt_num("A_min", c.A_min);
  opt_num("A_max", c.A_max);
  opt_int("trials", c.trials);
  opt_int("threads", c.threads);
  if (doc.contains("distances")) c.distances = per_user(doc["distances"], "/distances", 1);
  if (doc.contains("values")) c.values = per_user(doc["values"], "/values", 1);
  if (doc.contains("final_slot_arrivals")) {
    if (!doc["final_slot_arrivals"].is_boolean()) throw ParseError("expected a boolean at /final_slot_arrivals");
    c.final_slot_arrivals = doc["final_slot_arrivals"].get<bool>();
  }
  if (doc.contains("log_y")) {
    if (!doc["log_y"].is_boolean()) throw ParseError("expected a boolean at /log_y");
    c.log_y = doc["log_y"].get<bool>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ParseError("expected a nonnegative integer at /seed");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  auto opt_str = [&](const char* key, std::string& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_string()) throw ParseError(std::string("expected a string at /") + key);
    dst = doc[key].get<std::string>();
  };
  opt_str("uplink_model", c.uplink_model);
  opt_str("axis", c.axis);
  if (doc.contains("schemes")) {
    const json& a = array(doc["schemes"], "/schemes");
    c.schemes.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_string()) throw ParseError("expected a scheme name at " + child("/schemes", i));
      try {
        c.schemes.push_back(parse_scheme(a[i].get<std::string>()));
      } catch (const Error& e) {
        throw ParseError(child("/schemes", i) + ": " + e.what());
      }
    }
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    if (!s.is_object()) throw ParseError("expected an object at /solver");
    reject_unknown(s, {"gap_tol", "tol", "max_iter", "restarts"}, "/solver");
    if (s.contains("gap_tol")) c.solver.gap_tol = number(s["gap_tol"], "/solver/gap_tol");
    if (s.contains("tol")) c.solver.tol = number(s["tol"], "/solver/tol");
    if (s.contains("max_iter")) c.solver.max_iter = integer(s["max_iter"], "/solver/max_iter");
    if (s.contains("restarts")) c.solver.restarts = integer(s["restarts"], "/solver/restarts");
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& c, int indent) {
  json schemes = json::array();
  for (Scheme s : c.schemes) schemes.push_back(to_string(s));
  json doc = {{"M", c.M},
              {"K", c.K},
              {"N", c.N},
              {"tau", c.tau},
              {"B", c.B},
              {"sigma2", c.sigma2},
              {"eta", c.eta},
              {"C0", c.C0},
              {"Ck", c.Ck},
              {"zeta0", c.zeta0},
              {"zetak", c.zetak},
              {"pathloss_ref_db", c.pathloss_ref_db},
              {"pathloss_exponent", c.pathloss_exponent},
              {"distances", c.distances},
              {"A_min", c.A_min},
              {"A_max", c.A_max},
              {"final_slot_arrivals", c.final_slot_arrivals},
              {"uplink_model", c.uplink_model},
              {"trials", c.trials},
              {"seed", c.seed},
              {"axis", c.axis},
              {"values", c.values},
              {"schemes", schemes},
              {"log_y", c.log_y},
              {"threads", c.threads},
              {"solver",
               {{"gap_tol", c.solver.gap_tol},
                {"tol", c.solver.tol},
                {"max_iter", c.solver.max_iter},
                {"restarts", c.solver.restarts}}}};
  return doc.dump(indent);
}

std::string report_to_json(const SolveReport& r, const KktReport* kkt, int indent) {
  json doc;
  doc["scheme"] = to_string(r.scheme);
  doc["status"] = r.status;
  doc["primal_objective"] = num(r.primal_objective);
  doc["dual_value"] = num(r.dual_value);
  doc["duality_gap_rel"] = num(r.duality_gap_rel);
  doc["iterations"] = r.iterations;
  doc["wall_time_s"] = r.wall_time_s;
  doc["repair"] = {{"applied", r.repair.applied}, {"magnitude", r.repair.magnitude}, {"excessive", r.repair.excessive}};
  doc["sdp_status"] = to_string(r.sdp_status);
  json Q = json::array();
  for (const auto& q : r.allocation.covariance) Q.push_back(cmat_json(q));
  doc["allocation"] = {{"Q", Q},
                       {"L0", vec_json(r.allocation.server_bits)},
                       {"L", mat_json(r.allocation.local_bits)},
                       {"R", mat_json(r.allocation.offload_bits)}};
  const auto& res = r.residuals;
  doc["residuals"] = {{"user_task_causality", mat_json(res.user_task_causality)},
                      {"user_deadline", vec_json(res.user_deadline)},
                      {"ap_task_causality", vec_json(res.ap_task_causality)},
                      {"ap_deadline", num(res.ap_deadline)},
                      {"energy_causality", mat_json(res.energy_causality)},
                      {"r_last", vec_json(res.last_slot_offload)},
                      {"min_bits", num(res.min_bits)},
                      {"min_covariance_eig", num(res.min_covariance_eig)}};
  doc["feasibility"] = {{"feasible", r.feasibility.feasible},
                        {"first_violation", r.feasibility.first_violation},
                        {"worst_bits_slack", num(r.feasibility.worst_bits_slack)},
                        {"worst_energy_slack", num(r.feasibility.worst_energy_slack)},
                        {"worst_equality", num(r.feasibility.worst_equality)}};
  if (r.has_dual) {
    doc["dual"] = {{"lambda", mat_json(r.dual.energy)},
                   {"mu", mat_json(r.dual.user_task)},
                   {"nu", vec_json(r.dual.server_task)}};
  }
  doc["notes"] = r.notes;
  if (kkt) {
    doc["kkt"] = {{"stationarity", num(kkt->stationarity)},
                  {"dual_sign", num(kkt->dual_sign)},
                  {"complementarity", num(kkt->complementarity)},
                  {"psd", num(kkt->psd)},
                  {"beamforming", num(kkt->beamforming)},
                  {"worst", num(kkt->worst())},
                  {"worst_condition", kkt->worst_condition}};
  }
  return doc.dump(indent);
}

std::string validation_to_json(const ValidationReport& report, int indent) {
  return json{{"ok", report.ok()}, {"violations", report.violations}}.dump(indent);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << body;
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace wpmec
