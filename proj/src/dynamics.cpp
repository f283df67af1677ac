// Copyright 2026 The cvim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cvim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <memory>
#include <numeric>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "cvim/integrator.hpp"

namespace cvim {
namespace {

/// dy/dt = -i (H_s + eps H_d) y - (1/2) Gamma y on a merged CSR pattern.
/// H_s and H_d share one index stream; Gamma is kept as a diagonal when
/// possible (photon loss, dephasing).
class Generator {
 public:
  Generator(const SparseMatrix& hs, const SparseMatrix& hd, const SparseMatrix& gamma) {
    SparseMatrix hs_u = hs + Complex(0.0) * hd;
    SparseMatrix hd_u = hd + Complex(0.0) * hs;
    hs_u.makeCompressed();
    hd_u.makeCompressed();
    n_ = hs.rows();
    const Index nnz = hs_u.nonZeros();
    if (hd_u.nonZeros() != nnz) throw DimensionError("Generator: pattern merge failed");
    outer_.assign(hs_u.outerIndexPtr(), hs_u.outerIndexPtr() + n_ + 1);
    inner_.assign(hs_u.innerIndexPtr(), hs_u.innerIndexPtr() + nnz);
    for (Index k = 0; k < nnz; ++k)
      if (hd_u.innerIndexPtr()[k] != inner_[static_cast<std::size_t>(k)])
        throw DimensionError("Generator: pattern merge failed");

    hs_.assign(hs_u.valuePtr(), hs_u.valuePtr() + nnz);
    hd_.assign(hd_u.valuePtr(), hd_u.valuePtr() + nnz);
    real_ = std::all_of(hs_.begin(), hs_.end(), [](Complex c) { return c.imag() == 0.0; }) &&
            std::all_of(hd_.begin(), hd_.end(), [](Complex c) { return c.imag() == 0.0; });
    if (real_) {
      hs_re_.reserve(hs_.size());
      hd_re_.reserve(hd_.size());
      for (Complex c : hs_) hs_re_.push_back(c.real());
      for (Complex c : hd_) hd_re_.push_back(c.real());
    }

    has_gamma_ = gamma.nonZeros() > 0;
    bool diagonal = true;
    for (Index r = 0; r < n_ && diagonal; ++r)
      for (SparseMatrix::InnerIterator it(gamma, r); it; ++it)
        if (it.col() != r) diagonal = false;
    if (diagonal) {
      gamma_diag_ = Eigen::VectorXd::Zero(n_);
      for (Index r = 0; r < n_; ++r)
        for (SparseMatrix::InnerIterator it(gamma, r); it; ++it) gamma_diag_(r) = it.value().real();
    } else {
      gamma_full_ = gamma;
    }
  }

  Index size() const { return n_; }

  void apply(double eps, const Vector& y, Vector& dy) const {
    dy.resize(n_);
    const Complex* yv = y.data();
    Complex* out = dy.data();
    if (real_) {
      for (Index i = 0; i < n_; ++i) {
        double re = 0.0, im = 0.0;
        for (int k = outer_[static_cast<std::size_t>(i)]; k < outer_[static_cast<std::size_t>(i) + 1]; ++k) {
          const double c = hs_re_[static_cast<std::size_t>(k)] + eps * hd_re_[static_cast<std::size_t>(k)];
          const Complex v = yv[inner_[static_cast<std::size_t>(k)]];
          re += c * v.real();
          im += c * v.imag();
        }
        out[i] = Complex(im, -re);
      }
    } else {
      for (Index i = 0; i < n_; ++i) {
        Complex acc = 0.0;
        for (int k = outer_[static_cast<std::size_t>(i)]; k < outer_[static_cast<std::size_t>(i) + 1]; ++k)
          acc += (hs_[static_cast<std::size_t>(k)] + eps * hd_[static_cast<std::size_t>(k)]) *
                 yv[inner_[static_cast<std::size_t>(k)]];
        out[i] = Complex(acc.imag(), -acc.real());
      }
    }
    if (!has_gamma_) return;
    if (gamma_diag_.size() == n_)
      dy.array() -= 0.5 * gamma_diag_.array().cast<Complex>() * y.array();
    else
      dy.noalias() -= 0.5 * (gamma_full_ * y);
  }

 private:
  Index n_ = 0;
  std::vector<int> outer_, inner_;
  std::vector<Complex> hs_, hd_;
  std::vector<double> hs_re_, hd_re_;
  bool real_ = false;
  bool has_gamma_ = false;
  Eigen::VectorXd gamma_diag_;
  SparseMatrix gamma_full_;
};

/// Block of `op` mapping basis subset `cols` into subset `rows`.
SparseMatrix restrict_block(const SparseMatrix& op, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  const Index n = op.rows();
  std::vector<Index> col_pos(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < cols.size(); ++k) col_pos[static_cast<std::size_t>(cols[k])] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<Complex>> trips;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (SparseMatrix::InnerIterator it(op, rows[r]); it; ++it) {
      const Index c = col_pos[static_cast<std::size_t>(it.col())];
      if (c >= 0) trips.emplace_back(static_cast<Index>(r), c, it.value());
    }
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

/// Parity sign (+1 commute, -1 anticommute, 0 neither) of a sparse matrix
/// relative to a diagonal +-1 symmetry.
int parity_relation(const SparseMatrix& op, const std::vector<signed char>& sign) {
  bool commute = true, anti = true;
  for (Index r = 0; r < op.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op, r); it; ++it) {
      if (std::abs(it.value()) == 0.0) continue;
      const int s = sign[static_cast<std::size_t>(it.row())] * sign[static_cast<std::size_t>(it.col())];
      if (s > 0) anti = false;
      else commute = false;
    }
  return commute ? 1 : anti ? -1 : 0;
}

/// Propagation space of a trajectory: either the whole space, or the two
/// photon-parity sectors when the Hamiltonian conserves parity and every
/// jump operator maps a sector onto a sector.
struct SectorSystem {
  struct Sector {
    std::vector<Index> basis;
    std::unique_ptr<Generator> generator;
    std::vector<SparseMatrix> jumps;  // per active channel, into `targets[c]`
    std::vector<int> targets;
  };
  std::vector<Sector> sectors;
  Index full_size = 0;

  int sector_of(const Vector& full) const {
    if (sectors.size() == 1) return 0;
    double w0 = 0.0, w1 = 0.0;
    for (Index i : sectors[0].basis) w0 += std::norm(full(i));
    for (Index i : sectors[1].basis) w1 += std::norm(full(i));
    const double tot = w0 + w1;
    if (w1 <= 1e-24 * tot) return 0;
    if (w0 <= 1e-24 * tot) return 1;
    return -1;
  }

  Vector gather(const Vector& full, int s) const {
    const auto& b = sectors[static_cast<std::size_t>(s)].basis;
    if (sectors.size() == 1) return full;
    Vector v(static_cast<Index>(b.size()));
    for (std::size_t k = 0; k < b.size(); ++k) v(static_cast<Index>(k)) = full(b[k]);
    return v;
  }

  Vector scatter(const Vector& part, int s) const {
    if (sectors.size() == 1) return part;
    const auto& b = sectors[static_cast<std::size_t>(s)].basis;
    Vector v = Vector::Zero(full_size);
    for (std::size_t k = 0; k < b.size(); ++k) v(b[k]) = part(static_cast<Index>(k));
    return v;
  }
};

SectorSystem build_sectors(const SplitHamiltonian& h, const std::vector<JumpChannel>& channels,
                           bool allow_split = true) {
  const FockDims& dims = h.static_part.dims;
  const SparseMatrix& hs = h.static_part.matrix;
  const SparseMatrix hd = h.drive_total().matrix;
  SparseMatrix gamma(hs.rows(), hs.cols());
  std::vector<const JumpChannel*> active;
  for (const auto& c : channels) {
    if (c.rate <= 0.0) continue;
    active.push_back(&c);
    gamma += c.rate * SparseMatrix(c.op.matrix.adjoint() * c.op.matrix);
  }
  gamma.makeCompressed();

  SectorSystem sys;
  sys.full_size = dims.total();

  std::vector<signed char> sign(static_cast<std::size_t>(dims.total()));
  const Operator parity = parity_operator(dims);
  for (Index i = 0; i < dims.total(); ++i) sign[static_cast<std::size_t>(i)] = parity.matrix.coeff(i, i).real() > 0 ? 1 : -1;
  bool split = allow_split && parity_relation(hs, sign) == 1 && parity_relation(hd, sign) == 1;
  std::vector<int> relation;
  for (const auto* c : active) {
    relation.push_back(parity_relation(c->op.matrix, sign));
    if (relation.back() == 0) split = false;
  }

  if (!split) {
    SectorSystem::Sector s;
    s.basis.resize(static_cast<std::size_t>(dims.total()));
    std::iota(s.basis.begin(), s.basis.end(), Index{0});
    s.generator = std::make_unique<Generator>(hs, hd, gamma);
    for (const auto* c : active) {
      s.jumps.push_back(c->op.matrix);
      s.targets.push_back(0);
    }
    sys.sectors.push_back(std::move(s));
    return sys;
  }

  sys.sectors.resize(2);
  for (Index i = 0; i < dims.total(); ++i) sys.sectors[sign[static_cast<std::size_t>(i)] > 0 ? 0 : 1].basis.push_back(i);
  for (int k = 0; k < 2; ++k) {
    auto& s = sys.sectors[static_cast<std::size_t>(k)];
    s.generator = std::make_unique<Generator>(restrict_block(hs, s.basis, s.basis), restrict_block(hd, s.basis, s.basis),
                                              restrict_block(gamma, s.basis, s.basis));
    for (std::size_t c = 0; c < active.size(); ++c) {
      const int target = relation[c] == 1 ? k : 1 - k;
      s.targets.push_back(target);
      s.jumps.emplace_back();
    }
  }
  // Jump blocks need both bases, so fill them once both sectors exist.
  for (int k = 0; k < 2; ++k) {
    auto& s = sys.sectors[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < active.size(); ++c)
      s.jumps[c] = restrict_block(active[c]->op.matrix, sys.sectors[static_cast<std::size_t>(s.targets[c])].basis, s.basis);
  }
  return sys;
}

/// Uniform double in (0, 1], identical on every platform for a given engine.
double uniform_open0(std::mt19937_64& rng) { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; }

void check_samples(const std::vector<double>& samples, double duration) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] < 0.0 || samples[i] > duration * (1.0 + 1e-12))
      throw ParameterError("sample times must lie in [0, T]");
    if (i > 0 && samples[i] < samples[i - 1]) throw ParameterError("sample times must be sorted");
  }
}

void check_problem_dims(const TrajectoryProblem& p) {
  const FockDims& dims = p.hamiltonian.static_part.dims;
  if (!(p.initial.dims == dims)) throw DimensionError("trajectory: initial state dims do not match Hamiltonian");
  for (const auto& d : p.hamiltonian.drive_parts)
    if (!(d.dims == dims)) throw DimensionError("trajectory: drive dims do not match Hamiltonian");
  for (const auto& c : p.channels) {
    if (!(c.op.dims == dims)) throw DimensionError("trajectory: jump operator dims do not match Hamiltonian");
    if (!(c.rate >= 0.0)) throw ParameterError("trajectory: jump rates must be >= 0");
  }
}

}  // namespace

Observable Observable::expectation(std::string name, Operator op) {
  Observable o;
  o.name_ = std::move(name);
  o.real_ = hermiticity_error(op) < 1e-12;
  o.op_ = std::move(op);
  return o;
}

Observable Observable::fidelity(std::string name, StateVector reference) {
  Observable o;
  o.name_ = std::move(name);
  o.reference_ = reference.normalized().amplitudes;
  return o;
}

Complex Observable::operator()(const Vector& psi) const {
  if (op_) {
    if (op_->size() != psi.size()) throw DimensionError("Observable: dimension mismatch");
    return psi.dot(op_->matrix * psi);
  }
  if (reference_->size() != psi.size()) throw DimensionError("Observable: dimension mismatch");
  return std::norm(reference_->dot(psi));
}

const std::vector<Complex>& TrajectoryRecord::observable(std::string_view name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return series[k];
  throw EvaluationError("TrajectoryRecord: missing observable '" + std::string(name) + "'");
}

std::vector<double> uniform_samples(double duration, int count) {
  if (count < 2) throw ParameterError("uniform_samples: need at least two samples");
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) t[static_cast<std::size_t>(k)] = duration * k / (count - 1);
  t.back() = duration;
  return t;
}

bool is_closed(const std::vector<JumpChannel>& channels) {
  return std::none_of(channels.begin(), channels.end(), [](const JumpChannel& c) { return c.rate > 0.0; });
}

TrajectoryRecord mcwf_trajectory(const TrajectoryProblem& problem, std::uint64_t seed, const JumpHook& on_jump) {
  check_problem_dims(problem);
  problem.schedule.validate();
  const double duration = problem.schedule.duration;
  const std::vector<double> samples =
      problem.sample_times.empty() ? uniform_samples(duration) : problem.sample_times;
  check_samples(samples, duration);

  // Channel indices reported in jump events refer to problem.channels.
  std::vector<int> active_index;
  for (std::size_t k = 0; k < problem.channels.size(); ++k)
    if (problem.channels[k].rate > 0.0) active_index.push_back(static_cast<int>(k));
  std::vector<double> active_rate;
  for (int k : active_index) active_rate.push_back(problem.channels[static_cast<std::size_t>(k)].rate);

  const DriveSchedule schedule = problem.schedule;
  const Vector psi0 = problem.initial.normalized().amplitudes;
  SectorSystem sys = build_sectors(problem.hamiltonian, problem.channels);
  int sector = sys.sector_of(psi0);
  if (sector < 0) {
    sys = build_sectors(problem.hamiltonian, problem.channels, /*allow_split=*/false);
    sector = 0;
  }
  const FockDims& dims = problem.initial.dims;

  const std::vector<Index> leak_idx = problem.track_leakage ? top_level_indices(dims) : std::vector<Index>{};

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.sample_times = samples;
  for (const auto& o : problem.observables) rec.names.push_back(o.name());
  rec.series.assign(problem.observables.size(), {});
  for (auto& s : rec.series) s.reserve(samples.size());

  const auto record_sample = [&](const Vector& y) {
    const Vector unit = sys.scatter(y, sector) / y.norm();
    for (std::size_t k = 0; k < problem.observables.size(); ++k) rec.series[k].push_back(problem.observables[k](unit));
    if (!leak_idx.empty()) rec.max_leakage = std::max(rec.max_leakage, population(unit, leak_idx));
  };

  // The generator of the current sector; the stepper calls through the
  // pointer so a sector change needs only a reset.
  const Generator* gen = sys.sectors[static_cast<std::size_t>(sector)].generator.get();
  DormandPrince<Vector> stepper([&](double t, const Vector& y, Vector& dy) { gen->apply(schedule(t), y, dy); },
                                problem.options.rtol, problem.options.atol);

  std::mt19937_64 rng(seed);
  double threshold = active_index.empty() ? 0.0 : uniform_open0(rng);

  Vector psi = sys.gather(psi0, sector);
  std::size_t next = 0;
  while (next < samples.size() && samples[next] <= 0.0) record_sample(psi), ++next;

  stepper.reset(0.0, psi, problem.options.initial_step);
  double t = 0.0;
  while (t < duration) {
    const double target = next < samples.size() ? std::min(samples[next], duration) : duration;
    if (target <= t) {
      record_sample(stepper.state());
      ++next;
      continue;
    }
    stepper.step(target);
    t = stepper.time();
    const Vector& y = stepper.state();
    const double nn = y.squaredNorm();
    if (!(nn > 1e-300)) throw ConvergenceError("mcwf_trajectory: state norm underflow without a detected jump");

    if (!active_index.empty() && nn <= threshold) {
      double lo = stepper.last_step_start(), hi = t;
      Vector at_hi = y;
      while (hi - lo > problem.options.jump_time_resolution) {
        const double mid = 0.5 * (lo + hi);
        Vector ym = stepper.dense(mid);
        if (ym.squaredNorm() <= threshold) {
          hi = mid;
          at_hi = std::move(ym);
        } else {
          lo = mid;
        }
      }
      const auto& cur = sys.sectors[static_cast<std::size_t>(sector)];
      std::vector<double> weights(active_index.size());
      std::vector<Vector> images(active_index.size());
      double total = 0.0;
      for (std::size_t c = 0; c < active_index.size(); ++c) {
        images[c] = cur.jumps[c] * at_hi;
        weights[c] = active_rate[c] * images[c].squaredNorm();
        total += weights[c];
      }
      Vector after;
      if (total > 0.0) {
        double pick = uniform_open0(rng) * total;
        std::size_t chosen = 0;
        while (chosen + 1 < active_index.size() && pick > weights[chosen]) pick -= weights[chosen++];
        // Guard against rounding landing on a zero-weight channel.
        while (weights[chosen] == 0.0) chosen = (chosen + 1) % active_index.size();
        after = images[chosen] / images[chosen].norm();
        const int target_sector = cur.targets[chosen];
        const JumpEvent ev{hi, active_index[chosen]};
        rec.jumps.push_back(ev);
        if (on_jump)
          on_jump(ev, StateVector(sys.scatter(at_hi, sector) / at_hi.norm(), dims),
                  StateVector(sys.scatter(after, target_sector), dims));
        sector = target_sector;
        gen = sys.sectors[static_cast<std::size_t>(sector)].generator.get();
      } else {
        after = at_hi / at_hi.norm();
      }
      if (!leak_idx.empty()) rec.max_leakage = std::max(rec.max_leakage, population(sys.scatter(after, sector), leak_idx));
      threshold = uniform_open0(rng);
      t = hi;
      stepper.reset(hi, after, stepper.step_size());
      continue;
    }
    if (next < samples.size() && t >= samples[next]) {
      record_sample(y);
      ++next;
    }
  }
  while (next < samples.size()) record_sample(stepper.state()), ++next;

  const Vector& final_y = stepper.state();
  rec.norm_drift = active_index.empty() ? std::abs(final_y.norm() - 1.0) : 0.0;
  rec.final_state = StateVector(sys.scatter(final_y, sector) / final_y.norm(), dims);
  rec.steps = stepper.accepted();
  return rec;
}

TrajectoryRecord evolve_coherent(const SplitHamiltonian& h, const DriveSchedule& schedule, const StateVector& psi0,
                                 const std::vector<double>& sample_times, const std::vector<Observable>& observables,
                                 const IntegratorOptions& options) {
  TrajectoryProblem p{h, schedule, {}, psi0, sample_times, observables, false, options};
  TrajectoryRecord rec = mcwf_trajectory(p, 0);
  if (rec.norm_drift > options.max_norm_drift) {
    std::ostringstream os;
    os << "evolve_coherent: norm drift " << rec.norm_drift << " exceeds " << options.max_norm_drift << " after "
       << rec.steps << " steps";
    throw ConvergenceError(os.str());
  }
  return rec;
}

std::vector<DensityMatrix> lindblad_evolve(const SplitHamiltonian& h, const DriveSchedule& schedule,
                                           const std::vector<JumpChannel>& channels, const DensityMatrix& rho0,
                                           const std::vector<double>& sample_times, const IntegratorOptions& options) {
  const FockDims& dims = h.static_part.dims;
  if (dims.total() > kMaxLindbladDimension)
    throw CapacityError("lindblad_evolve: dimension " + std::to_string(dims.total()) + " exceeds dense limit " +
                        std::to_string(kMaxLindbladDimension));
  if (!(rho0.dims == dims)) throw DimensionError("lindblad_evolve: rho0 dims do not match Hamiltonian");
  schedule.validate();
  const std::vector<double> samples = sample_times.empty() ? uniform_samples(schedule.duration) : sample_times;
  check_samples(samples, schedule.duration);

  const DenseMatrix hs = h.static_part.dense();
  const DenseMatrix hd = h.drive_total().dense();
  DenseMatrix gamma = DenseMatrix::Zero(dims.total(), dims.total());
  std::vector<std::pair<DenseMatrix, double>> jumps;
  for (const auto& c : channels) {
    if (!(c.op.dims == dims)) throw DimensionError("lindblad_evolve: jump operator dims do not match");
    if (!(c.rate >= 0.0)) throw ParameterError("lindblad_evolve: jump rates must be >= 0");
    if (c.rate == 0.0) continue;
    const DenseMatrix l = c.op.dense();
    gamma += c.rate * l.adjoint() * l;
    jumps.emplace_back(l, c.rate);
  }
  const Complex i(0.0, 1.0);
  DenseMatrix heff(dims.total(), dims.total());
  DormandPrince<DenseMatrix> stepper(
      [&](double t, const DenseMatrix& rho, DenseMatrix& drho) {
        heff = hs + schedule(t) * hd - 0.5 * i * gamma;
        drho.noalias() = -i * (heff * rho);
        drho.noalias() += i * (rho * heff.adjoint());
        for (const auto& [l, rate] : jumps) drho.noalias() += rate * (l * rho * l.adjoint());
      },
      options.rtol, options.atol);

  std::vector<DensityMatrix> out;
  const auto emit = [&](const DenseMatrix& rho) { out.emplace_back(0.5 * (rho + rho.adjoint()), dims); };
  std::size_t next = 0;
  while (next < samples.size() && samples[next] <= 0.0) emit(rho0.matrix), ++next;
  stepper.reset(0.0, rho0.matrix, options.initial_step);
  while (next < samples.size()) {
    const double target = samples[next];
    if (target > stepper.time()) stepper.step(target);
    if (stepper.time() >= target) {
      emit(stepper.state());
      ++next;
    }
  }
  return out;
}

TrajectoryOutcome run_outcome(const TrajectoryProblem& problem, std::uint64_t seed, const Evaluator& evaluate,
                              bool keep_final_state) {
  TrajectoryOutcome out;
  try {
    TrajectoryRecord rec = mcwf_trajectory(problem, seed);
    out.score = evaluate ? evaluate(rec) : 0.0;
    if (!(out.score >= 0.0 && out.score <= 1.0)) throw EvaluationError("evaluator returned a score outside [0, 1]");
    if (!keep_final_state) rec.final_state = StateVector();
    out.record = std::move(rec);
  } catch (const std::exception& e) {
    out.record.reset();
    out.error = e.what();
  }
  return out;
}

EnsembleResult aggregate_ensemble(std::vector<TrajectoryOutcome> outcomes, const EnsembleOptions& options) {
  EnsembleResult res;
  res.n_traj = static_cast<int>(outcomes.size());
  std::vector<double> scores, jumps;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    auto& o = outcomes[k];
    if (!o.ok()) {
      ++res.n_failed;
      res.failures.push_back("trajectory " + std::to_string(k) + ": " + o.error);
      continue;
    }
    const TrajectoryRecord& r = *o.record;
    scores.push_back(o.score);
    jumps.push_back(static_cast<double>(r.jumps.size()));
    res.max_leakage = std::max(res.max_leakage, r.max_leakage);
    if (res.names.empty() && res.mean_series.empty()) {
      res.sample_times = r.sample_times;
      res.names = r.names;
      res.mean_series.assign(r.series.size(), std::vector<Complex>(r.sample_times.size(), 0.0));
    }
    for (std::size_t s = 0; s < r.series.size() && s < res.mean_series.size(); ++s)
      for (std::size_t j = 0; j < r.series[s].size() && j < res.mean_series[s].size(); ++j)
        res.mean_series[s][j] += r.series[s][j];
  }
  if (res.n_traj > 0 && res.n_failed > options.max_failure_fraction * res.n_traj) {
    std::ostringstream os;
    os << "ensemble: " << res.n_failed << " of " << res.n_traj << " trajectories failed";
    if (!res.failures.empty()) os << " (first: " << res.failures.front() << ")";
    throw EnsembleError(os.str());
  }
  const auto mean_and_stderr = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    if (v.empty()) return std::pair{0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    if (v.size() < 2) return std::pair{m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / (n - 1.0) / n)};
  };
  std::tie(res.success_fraction, res.stderr_success) = mean_and_stderr(scores);
  std::tie(res.mean_jump_count, res.stderr_jumps) = mean_and_stderr(jumps);
  const double n_ok = static_cast<double>(scores.size());
  for (auto& s : res.mean_series)
    for (auto& v : s) v /= n_ok;
  if (options.keep_records)
    for (auto& o : outcomes)
      if (o.ok()) res.records.push_back(std::move(*o.record));
  return res;
}

EnsembleResult ensemble_run(const TrajectoryProblem& problem, int n_traj, std::uint64_t base_seed,
                            const Evaluator& evaluate, const EnsembleOptions& options) {
  if (n_traj < 1) throw ParameterError("ensemble_run: n_traj must be >= 1");
  std::vector<TrajectoryOutcome> outcomes(static_cast<std::size_t>(n_traj));

  if (is_closed(problem.channels)) {
    // Without jumps every trajectory is the same deterministic run.
    const TrajectoryOutcome first = run_outcome(problem, trajectory_seed(base_seed, 0), evaluate, options.keep_records);
    for (int k = 0; k < n_traj; ++k) {
      outcomes[static_cast<std::size_t>(k)] = first;
      if (first.ok()) outcomes[static_cast<std::size_t>(k)].record->seed = trajectory_seed(base_seed, static_cast<std::uint64_t>(k));
    }
    return aggregate_ensemble(std::move(outcomes), options);
  }

  std::atomic<int> next{0};
  const auto work = [&] {
    for (int k = next++; k < n_traj; k = next++)
      outcomes[static_cast<std::size_t>(k)] =
          run_outcome(problem, trajectory_seed(base_seed, static_cast<std::uint64_t>(k)), evaluate, options.keep_records);
  };
  const int workers = std::clamp(options.workers, 1, n_traj);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return aggregate_ensemble(std::move(outcomes), options);
}

}  // namespace cvim
