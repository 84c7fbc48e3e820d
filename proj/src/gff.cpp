#include "hclab/gff.hpp"

#include <cmath>
#include <sstream>

#include "hclab/error.hpp"
#include "hclab/rng.hpp"

namespace hclab {

GffSampler::GffSampler(std::shared_ptr<const DirichletOperator> op, std::string label)
    : op_(std::move(op)), label_(std::move(label)) {
  if (!op_) throw InvalidArgument("GFF sampler needs an operator");
  if (!op_->solver().has_factor())
    throw SolverError("GFF sampling needs an exact factorization; domain exceeds the direct-solver threshold");
}

GffSampler::GffSampler(const EnvPtr& env, const SiteSet& domain, const SolverOptions& options)
    : GffSampler(std::make_shared<const DirichletOperator>(env, domain, options)) {}

Matrix GffSampler::sample_matrix(std::uint64_t seed, std::uint64_t first, std::size_t count) const {
  const auto n = static_cast<Eigen::Index>(op_->size());
  Matrix z(n, static_cast<Eigen::Index>(count));
  for (std::size_t j = 0; j < count; ++j) {
    StreamRng rng(seed, derive_stream(label_, first + j));
    for (Eigen::Index i = 0; i < n; ++i) z(i, static_cast<Eigen::Index>(j)) = rng.normal();
  }
  return op_->solver().correlate(z);
}

FieldSample GffSampler::sample(std::uint64_t seed, std::uint64_t replica) const {
  Matrix m = sample_matrix(seed, replica, 1);
  return FieldSample{Field(op_->domain(), m.col(0)), seed, replica};
}

std::vector<FieldSample> GffSampler::sample(std::uint64_t seed, std::uint64_t first, std::size_t count) const {
  const Matrix m = sample_matrix(seed, first, count);
  std::vector<FieldSample> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j)
    out.push_back(FieldSample{Field(op_->domain(), m.col(static_cast<Eigen::Index>(j))), seed, first + j});
  return out;
}

std::vector<FieldSample> sample_gff(const EnvPtr& env, const SiteSet& domain, std::size_t count, std::uint64_t seed,
                                    const SolverOptions& options) {
  return GffSampler(env, domain, options).sample(seed, 0, count);
}

// ---------------------------------------------------------------------------

Decomposer::Decomposer(const EnvPtr& env, SiteSet sample_domain, SiteSet sub, BoundaryPolicy policy,
                       const SolverOptions& options)
    : domain_(std::move(sample_domain)) {
  if (sub.empty()) throw GeometryError("decomposition subdomain is empty");
  if (!sub.is_subset_of(domain_)) throw GeometryError("decomposition subdomain is not inside the sample domain");
  op_ = std::make_shared<const DirichletOperator>(env, std::move(sub), options);
  for (const auto& e : op_->boundary_edges()) {
    const auto j = domain_.index_of(e.outer);
    if (j >= 0) {
      coupling_.emplace_back(static_cast<int>(e.inner), static_cast<int>(j), e.weight);
    } else if (policy == BoundaryPolicy::strict) {
      std::ostringstream os;
      os << "boundary site " << e.outer << " of the subdomain lies outside the sample domain";
      throw GeometryError(os.str());
    }
  }
  coupling_matrix_.resize(static_cast<int>(op_->size()), static_cast<int>(domain_.size()));
  coupling_matrix_.setFromTriplets(coupling_.begin(), coupling_.end());
}

Matrix Decomposer::harmonic_average(const Matrix& phi_values) const {
  if (static_cast<std::size_t>(phi_values.rows()) != domain_.size())
    throw InvalidArgument("field values do not match the sample domain");
  Matrix rhs = coupling_matrix_ * phi_values;
  return op_->solve(rhs);
}

Decomposition Decomposer::decompose(const Field& phi) const {
  const Vector values = (phi.domain == domain_) ? phi.values : phi.restricted_to(domain_);
  Matrix col = values;
  const Matrix xi_sub = harmonic_average(col);
  Decomposition d;
  d.sub = op_->domain();
  d.xi = Field(domain_, values);
  for (std::size_t i = 0; i < d.sub.size(); ++i)
    d.xi.values[domain_.index_of(d.sub[i])] = xi_sub(static_cast<Eigen::Index>(i), 0);
  d.psi = Field(domain_, values - d.xi.values);
  return d;
}

std::map<Site, double> Decomposer::exit_distribution(const Site& x) const {
  const Vector g = green_killed_column(*op_, x);
  std::map<Site, double> out;
  for (const auto& e : op_->boundary_edges()) out[e.outer] += g[static_cast<Eigen::Index>(e.inner)] * e.weight;
  return out;
}

Decomposition decompose(const EnvPtr& env, const FieldSample& phi, const SiteSet& sub, BoundaryPolicy policy) {
  return Decomposer(env, phi.field.domain, sub, policy).decompose(phi.field);
}

// ---------------------------------------------------------------------------

TiltedSampler::TiltedSampler(std::shared_ptr<const GffSampler> base, const Field& f) : base_(std::move(base)) {
  const SiteSet& u = base_->domain();
  f_ = Vector::Zero(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < f.domain.size(); ++i) {
    const double v = f.values[static_cast<Eigen::Index>(i)];
    if (v == 0.0) continue;
    const auto j = u.index_of(f.domain[i]);
    if (j < 0) throw GeometryError("tilt function is supported outside the sample domain");
    f_[j] = v;
  }
  lf_ = base_->op().matrix() * f_;
}

Matrix TiltedSampler::sample_matrix(std::uint64_t seed, std::uint64_t first, std::size_t count,
                                    Vector& log_weights) const {
  Matrix m = base_->sample_matrix(seed, first, count);
  m.colwise() += f_;
  const double h = entropy();
  log_weights = (-(lf_.transpose() * m)).transpose().array() + h;
  return m;
}

std::vector<TiltedSample> TiltedSampler::sample(std::uint64_t seed, std::uint64_t first, std::size_t count) const {
  Vector lw;
  const Matrix m = sample_matrix(seed, first, count, lw);
  std::vector<TiltedSample> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    out.push_back(TiltedSample{FieldSample{Field(base_->domain(), m.col(c)), seed, first + j}, lw[c]});
  }
  return out;
}

std::vector<TiltedSample> tilted_sample(const EnvPtr& env, const SiteSet& domain, const Field& f, std::size_t count,
                                        std::uint64_t seed, const SolverOptions& options) {
  auto base = std::make_shared<const GffSampler>(env, domain, options);
  return TiltedSampler(base, f).sample(seed, 0, count);
}

// ---------------------------------------------------------------------------

BoxGrid::BoxGrid(int dim, int L, int K, std::vector<Site> centers)
    : dim_(dim), L_(L), K_(K), centers_(std::move(centers)) {
  validate_dimension(dim);
  if (L < 1) throw InvalidArgument("box scale L must be positive");
  if (K < 5) throw InvalidArgument("box constant K must be at least 5 so that D_z lies inside U_z");
  for (const Site& z : centers_) {
    if (z.dim() != dim) throw InvalidArgument("box center dimension mismatch");
    for (int i = 0; i < dim; ++i)
      if (z[i] % L != 0) throw InvalidArgument("box centers must lie in L Z^d");
  }
}

namespace {

Box offset_box(const Site& z, int lo, int hi) {
  Site a = z, b = z;
  for (int i = 0; i < z.dim(); ++i) {
    a[i] += lo;
    b[i] += hi;
  }
  return Box(a, b);
}

}  // namespace

Box BoxGrid::box_B(const Site& z) const { return offset_box(z, 0, L_ - 1); }
Box BoxGrid::box_D(const Site& z) const { return offset_box(z, -3 * L_, 4 * L_ - 1); }
Box BoxGrid::box_U(const Site& z) const { return offset_box(z, -K_ * L_ + 1, K_ * L_ - 2); }

void BoxGrid::require_inside(const SiteSet& region) const {
  for (const Site& z : centers_) {
    const Box u = box_U(z);
    if (!region.bounding_box().contains(u) || !SiteSet(u).is_subset_of(region)) {
      std::ostringstream os;
      os << "box U_z for z = " << z << " leaves the sample domain";
      throw GeometryError(os.str());
    }
  }
}

BoxCollection::BoxCollection(int dim, int L, int K, std::vector<Site> centers)
    : BoxGrid(dim, L, K, std::move(centers)) {
  const int sep = (4 * K + 1) * L;
  const auto& c = this->centers();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (linf_norm(c[i] - c[j]) < sep) throw GeometryError("box collection violates the (4K+1)L separation");
}

Vector pairing_weights(const SiteSet& domain, int n, const TestFunction& eta) {
  if (n < 1) throw InvalidArgument("scale N must be positive");
  const int d = domain.dim();
  const double scale = std::pow(static_cast<double>(n), -d);
  Vector v(static_cast<Eigen::Index>(domain.size()));
  std::vector<double> p(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < domain.size(); ++i) {
    for (int k = 0; k < d; ++k) p[static_cast<std::size_t>(k)] = static_cast<double>(domain[i][k]) / n;
    v[static_cast<Eigen::Index>(i)] = scale * eta(p);
  }
  return v;
}

double ZFunctional::evaluate(const Field& phi) const { return weights.dot(phi.values); }
double ZFunctional::evaluate_z_m(const Field& phi) const { return z_m_weights.dot(phi.values); }

ZFunctional functional_Z(const GffSampler& sampler, const BoxCollection& collection, const SiteSet& c_target,
                         const std::map<Site, Site>& m, const TestFunction* eta, int n, double beta, double rho) {
  const SiteSet& u = sampler.domain();
  const EnvPtr& env = sampler.op().environment_ptr();
  collection.require_inside(u);
  if (!c_target.is_subset_of(u)) throw GeometryError("target set C leaves the sample domain");
  const Potential pc = solve_potential(env, c_target, u, sampler.op().options());
  ZFunctional out;
  out.capacity_c = pc.capacity;
  out.z_m_weights = Vector::Zero(static_cast<Eigen::Index>(u.size()));
  for (const Site& z : collection.centers()) {
    const Box b = collection.box_B(z);
    double mass = 0.0;
    for (std::size_t i = 0; i < c_target.size(); ++i)
      if (b.contains(c_target[i])) mass += pc.e.values[static_cast<Eigen::Index>(i)];
    const double lam = mass / pc.capacity;
    out.lambda.push_back(lam);
    out.lambda_sum += lam;
    auto it = m.find(z);
    if (it == m.end()) throw InvalidArgument("m has no point for a box center");
    if (!collection.box_D(z).contains(it->second)) throw InvalidArgument("m(z) lies outside D_z");
    if (lam == 0.0) continue;
    const Decomposer dec(env, u, SiteSet(collection.box_U(z)), BoundaryPolicy::zero_outside,
                         sampler.op().options());
    for (const auto& [y, p] : dec.exit_distribution(it->second)) {
      const auto j = u.index_of(y);
      if (j >= 0) out.z_m_weights[j] += lam * p;
    }
  }
  out.weights = (1.0 + rho) * out.z_m_weights;
  if (eta != nullptr && beta != 0.0) out.weights -= beta * pairing_weights(u, n, *eta);
  out.variance = out.weights.dot(sampler.op().solve(out.weights));
  out.variance_z_m = out.z_m_weights.dot(sampler.op().solve(out.z_m_weights));
  out.var_times_cap = out.variance_z_m * out.capacity_c;
  return out;
}

}  // namespace hclab
