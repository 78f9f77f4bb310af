#include "qpr/vqe.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "json.hpp"
#include "qpr/spinchain.hpp"
#include "qpr/threadpool.hpp"

namespace qpr::vqe {

using json = nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;
}

int num_angles(int m) {
  if (m < 1) throw std::invalid_argument("ansatz depth must be at least 1");
  return 7 + 12 * m;
}

Circuit build_ansatz_circuit(const std::vector<double>& theta, int m) {
  const std::size_t want = std::size_t(num_angles(m));
  if (theta.size() != want)
    throw std::invalid_argument("ansatz with depth " + std::to_string(m) + " takes " +
                                std::to_string(want) + " angles, got " +
                                std::to_string(theta.size()));
  Circuit c;
  c.n = 7;
  std::size_t k = 0;
  for (int q = 1; q <= 7; ++q) c.ry(q, theta[k++]);
  for (int rep = 0; rep < m; ++rep) {
    c.cz(1, 2);
    c.cz(3, 4);
    c.cz(5, 6);
    for (int q = 1; q <= 6; ++q) c.ry(q, theta[k++]);
    c.cz(2, 3);
    c.cz(4, 5);
    c.cz(6, 7);
    for (int q = 2; q <= 7; ++q) c.ry(q, theta[k++]);
  }
  return c;
}

double ansatz_energy(const std::vector<double>& theta, const WeightedPauliSum& h, int m) {
  return build_ansatz_circuit(theta, m).run().expectation(h);
}

std::vector<double> ansatz_gradient(const std::vector<double>& theta, const WeightedPauliSum& h,
                                    int m) {
  std::vector<double> g(theta.size());
  std::vector<double> shifted = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    shifted[i] = theta[i] + kPi / 2;
    double plus = ansatz_energy(shifted, h, m);
    shifted[i] = theta[i] - kPi / 2;
    double minus = ansatz_energy(shifted, h, m);
    shifted[i] = theta[i];
    g[i] = (plus - minus) / 2;
  }
  return g;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a > kPi) a -= 2 * kPi;
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

namespace {

struct Objective {
  const WeightedPauliSum* h;
  int m;
  std::vector<double> scratch;

  std::vector<double>& pull(const gsl_vector* x) {
    scratch.resize(x->size);
    for (std::size_t i = 0; i < x->size; ++i) scratch[i] = gsl_vector_get(x, i);
    return scratch;
  }
};

double obj_f(const gsl_vector* x, void* params) {
  auto* o = static_cast<Objective*>(params);
  return ansatz_energy(o->pull(x), *o->h, o->m);
}

void obj_df(const gsl_vector* x, void* params, gsl_vector* g) {
  auto* o = static_cast<Objective*>(params);
  std::vector<double> grad = ansatz_gradient(o->pull(x), *o->h, o->m);
  for (std::size_t i = 0; i < grad.size(); ++i) gsl_vector_set(g, i, grad[i]);
}

void obj_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
  *f = obj_f(x, params);
  obj_df(x, params, g);
}

struct RestartOutcome {
  std::vector<double> theta;
  double energy = 0;
  double fidelity = 0;
  int iterations = 0;
  std::vector<double> trace;
};

RestartOutcome run_restart(const WeightedPauliSum& h, const Eigen::VectorXcd& gs,
                           const OptimizeOptions& opts, std::uint64_t seed) {
  const int dim = num_angles(opts.m);
  std::mt19937_64 rng(seed);
  Objective obj{&h, opts.m, {}};

  gsl_vector* x = gsl_vector_alloc(std::size_t(dim));
  for (int i = 0; i < dim; ++i) {
    double u = double(rng() >> 11) * 0x1.0p-53;  // [0,1)
    gsl_vector_set(x, std::size_t(i), kPi - u * 2 * kPi);  // (-pi, pi]
  }

  gsl_multimin_function_fdf fdf;
  fdf.n = std::size_t(dim);
  fdf.f = &obj_f;
  fdf.df = &obj_df;
  fdf.fdf = &obj_fdf;
  fdf.params = &obj;

  gsl_multimin_fdfminimizer* s =
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, std::size_t(dim));
  gsl_multimin_fdfminimizer_set(s, &fdf, x, 0.1, 0.1);

  RestartOutcome out;
  out.trace.push_back(s->f);
  int iter = 0;
  while (iter < opts.max_iterations) {
    int status = gsl_multimin_fdfminimizer_iterate(s);
    if (status) break;  // no further progress along the search direction
    ++iter;
    out.trace.push_back(s->f);
    if (gsl_multimin_test_gradient(s->gradient, opts.gradient_tolerance) == GSL_SUCCESS) break;
  }

  out.theta.resize(std::size_t(dim));
  for (int i = 0; i < dim; ++i) out.theta[std::size_t(i)] = gsl_vector_get(s->x, std::size_t(i));
  out.energy = s->f;
  out.iterations = iter;
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);

  Statevector sv = build_ansatz_circuit(out.theta, opts.m).run();
  out.fidelity = fidelity(gs, sv.amps());
  return out;
}

}  // namespace

OptimizationResult optimize(double h1, double h2, const OptimizeOptions& opts) {
  if (opts.restarts < 1) throw std::invalid_argument("restart budget must be positive");
  gsl_set_error_handler_off();

  WeightedPauliSum h = cluster_ising(7, h1, h2);
  GroundState gs = ground_state(h);

  std::vector<std::optional<RestartOutcome>> done(std::size_t(opts.restarts));
  int accepted_index = -1;
  const int wave = std::max(1, opts.jobs);
  for (int base = 0; base < opts.restarts && accepted_index < 0; base += wave) {
    const int count = std::min(wave, opts.restarts - base);
    parallel_for(std::size_t(count), opts.jobs, [&](std::size_t i) {
      const int k = base + int(i);
      done[std::size_t(k)] = run_restart(h, gs.psi, opts, opts.seed + std::uint64_t(k));
    });
    for (int k = base; k < base + count; ++k)
      if (done[std::size_t(k)]->fidelity > opts.accept_fidelity) {
        accepted_index = k;
        break;
      }
  }

  int pick = accepted_index;
  if (pick < 0) {
    for (int k = 0; k < opts.restarts; ++k)
      if (done[std::size_t(k)] && (pick < 0 || done[std::size_t(k)]->energy < done[std::size_t(pick)]->energy))
        pick = k;
  }

  const RestartOutcome& r = *done[std::size_t(pick)];
  OptimizationResult out;
  out.theta = r.theta;
  out.energy = r.energy;
  out.fidelity = r.fidelity;
  out.iterations = r.iterations;
  out.restart_index = pick;
  out.seed = opts.seed + std::uint64_t(pick);
  out.accepted = accepted_index >= 0;
  out.trace = r.trace;
  return out;
}

RewrittenAngles rewrite_angles(const std::vector<double>& theta) {
  if (theta.size() != 19)
    throw std::invalid_argument("angle rewriting is defined for the depth-1 ansatz (19 angles)");
  RewrittenAngles out;
  out.theta = theta;
  auto t1 = [&](int q) -> double& { return out.theta[std::size_t(q - 1)]; };
  auto t2 = [&](int q) -> double& { return out.theta[std::size_t(7 + q - 1)]; };   // qubits 1..6
  auto t3 = [&](int q) -> double& { return out.theta[std::size_t(13 + q - 2)]; };  // qubits 2..7
  static const int partner_a[7] = {0, 2, 1, 4, 3, 6, 5};  // partner under the first CZ layer
  for (int q = 1; q <= 7; ++q) {
    double a = t1(q);
    if (std::abs(a) <= kPi / 2) continue;
    double s = a > 0 ? 1.0 : -1.0;
    t1(q) = a - s * kPi;
    if (q <= 6) {
      t2(q) = wrap_angle(t2(q) + s * kPi);
      int p = partner_a[q];
      t1(p) = -t1(p);
      out.zmask ^= 1u << (p - 1);
    } else {
      t3(7) = wrap_angle(t3(7) + s * kPi);
      t2(6) = -t2(6);
      t1(6) = -t1(6);
      out.zmask ^= 1u << 5;
    }
  }
  return out;
}

std::vector<AngleRecord> load_angle_store(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open angle store: " + path);
  std::vector<AngleRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      AngleRecord r;
      r.h1 = j.at("h1").get<double>();
      r.h2 = j.at("h2").get<double>();
      r.angles = j.at("angles").get<std::vector<double>>();
      r.fidelity = j.at("fidelity").get<double>();
      r.energy = j.at("energy").get<double>();
      r.seed = j.at("seed").get<std::uint64_t>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw std::invalid_argument("angle store " + path + " line " + std::to_string(lineno) +
                                  ": " + e.what());
    }
  }
  return out;
}

void append_angle_record(const std::string& path, const AngleRecord& rec) {
  std::ofstream f(path, std::ios::app);
  if (!f) throw std::runtime_error("cannot write angle store: " + path);
  json j;
  j["h1"] = rec.h1;
  j["h2"] = rec.h2;
  j["angles"] = rec.angles;
  j["fidelity"] = rec.fidelity;
  j["energy"] = rec.energy;
  j["seed"] = rec.seed;
  f << j.dump() << "\n";
}

std::optional<AngleRecord> lookup_angles(const std::vector<AngleRecord>& store, double h1,
                                         double h2, double tol) {
  std::optional<AngleRecord> found;
  for (const auto& r : store)
    if (std::abs(r.h1 - h1) <= tol && std::abs(r.h2 - h2) <= tol) found = r;
  return found;
}

}  // namespace qpr::vqe
