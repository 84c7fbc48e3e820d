#include "hclab/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <mutex>
#include <optional>
#include <sstream>

#include "hclab/error.hpp"

#ifdef HCLAB_HAVE_CHOLMOD
#include <cholmod.h>
#endif

namespace hclab {

namespace {

#ifdef HCLAB_HAVE_CHOLMOD

// Simplicial LL' factor held by CHOLMOD (no BLAS involved). CHOLMOD keeps
// workspace in its common object, so every call is serialized.
class CholmodFactor {
 public:
  explicit CholmodFactor(const SparseMatrix& a) {
    cholmod_start(&common_);
    common_.final_ll = 1;
    common_.print = 0;
    common_.supernodal = CHOLMOD_SIMPLICIAL;
    lower_ = a.triangularView<Eigen::Lower>();
    lower_.makeCompressed();
    cholmod_sparse view = sparse_view();
    factor_ = cholmod_analyze(&view, &common_);
    if (factor_ == nullptr) fail("analysis failed");
    cholmod_factorize(&view, factor_, &common_);
    if (common_.status == CHOLMOD_NOT_POSDEF) fail("matrix is not positive definite");
    if (common_.status < CHOLMOD_OK) fail("factorization failed");
  }

  ~CholmodFactor() {
    if (factor_) cholmod_free_factor(&factor_, &common_);
    cholmod_finish(&common_);
  }

  CholmodFactor(const CholmodFactor&) = delete;
  CholmodFactor& operator=(const CholmodFactor&) = delete;

  Matrix solve(int system, const Matrix& rhs) const {
    // Column by column: CHOLMOD's multi-column kernels round differently, and a
    // replica must not depend on the batch it was drawn in.
    std::lock_guard lock(mutex_);
    Matrix out(rhs.rows(), rhs.cols());
    Matrix b(rhs.rows(), 1);
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
      b.col(0) = rhs.col(j);
      cholmod_dense view = dense_view(b);
      cholmod_dense* x = cholmod_solve(system, factor_, &view, &common_);
      if (x == nullptr) throw SolverError("CHOLMOD solve failed");
      out.col(j) = Eigen::Map<const Vector>(static_cast<const double*>(x->x), rhs.rows());
      cholmod_free_dense(&x, &common_);
    }
    return out;
  }

  std::size_t nonzeros() const {
    if (factor_->is_super) return static_cast<std::size_t>(factor_->xsize);
    return static_cast<std::size_t>(factor_->nzmax);
  }

 private:
  [[noreturn]] void fail(const char* what) {
    std::ostringstream os;
    os << "CHOLMOD: " << what << " (status " << common_.status << ")";
    if (factor_) cholmod_free_factor(&factor_, &common_);
    cholmod_finish(&common_);
    throw SolverError(os.str());
  }

  cholmod_sparse sparse_view() {
    cholmod_sparse s{};
    s.nrow = static_cast<std::size_t>(lower_.rows());
    s.ncol = static_cast<std::size_t>(lower_.cols());
    s.nzmax = static_cast<std::size_t>(lower_.nonZeros());
    s.p = lower_.outerIndexPtr();
    s.i = lower_.innerIndexPtr();
    s.x = lower_.valuePtr();
    s.stype = -1;
    s.itype = CHOLMOD_INT;
    s.xtype = CHOLMOD_REAL;
    s.dtype = CHOLMOD_DOUBLE;
    s.sorted = 1;
    s.packed = 1;
    return s;
  }

  static cholmod_dense dense_view(Matrix& m) {
    cholmod_dense d{};
    d.nrow = static_cast<std::size_t>(m.rows());
    d.ncol = static_cast<std::size_t>(m.cols());
    d.nzmax = d.nrow * d.ncol;
    d.d = d.nrow;
    d.x = m.data();
    d.xtype = CHOLMOD_REAL;
    d.dtype = CHOLMOD_DOUBLE;
    return d;
  }

  mutable cholmod_common common_{};
  mutable std::mutex mutex_;
  cholmod_factor* factor_ = nullptr;
  SparseMatrix lower_;
};

#endif

using EigenLlt = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
using EigenCg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                         Eigen::DiagonalPreconditioner<double>>;

}  // namespace

struct SpdSolver::Impl {
  std::size_t n = 0;
  SolverOptions options;
#ifdef HCLAB_HAVE_CHOLMOD
  std::unique_ptr<CholmodFactor> cholmod;
#endif
  std::unique_ptr<EigenLlt> llt;
  std::unique_ptr<EigenCg> cg;
  SparseMatrix a;  // kept for residuals on the iterative path
  mutable std::mutex stats_mutex;
  mutable SolveStats stats;

  Vector iterative_solve(const Vector& b) const {
    Vector x = cg->solve(b);
    SolveStats s;
    s.direct = false;
    s.iterations = static_cast<int>(cg->iterations());
    const double bn = b.norm();
    s.relative_residual = bn > 0 ? (a * x - b).norm() / bn : 0.0;
    if (cg->info() != Eigen::Success || s.relative_residual > 10 * options.cg_tolerance) {
      std::ostringstream os;
      os << "conjugate gradient did not converge: residual " << s.relative_residual << " after "
         << s.iterations << " iterations";
      throw SolverError(os.str());
    }
    std::lock_guard lock(stats_mutex);
    stats = s;
    return x;
  }
};

SpdSolver::SpdSolver(const SparseMatrix& a, const SolverOptions& options) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw InvalidArgument("solver needs a square matrix");
  impl_->n = static_cast<std::size_t>(a.rows());
  impl_->options = options;
  if (impl_->n == 0) return;
  const bool direct = !options.force_iterative && impl_->n <= options.direct_threshold;
  if (direct) {
#ifdef HCLAB_HAVE_CHOLMOD
    impl_->cholmod = std::make_unique<CholmodFactor>(a);
#else
    impl_->llt = std::make_unique<EigenLlt>(a);
    if (impl_->llt->info() != Eigen::Success) throw SolverError("sparse Cholesky factorization failed");
#endif
  } else {
    impl_->a = a;
    impl_->cg = std::make_unique<EigenCg>();
    impl_->cg->setTolerance(options.cg_tolerance);
    impl_->cg->setMaxIterations(options.cg_max_iterations);
    impl_->cg->compute(impl_->a);
  }
}

SpdSolver::~SpdSolver() = default;

std::size_t SpdSolver::size() const { return impl_->n; }

bool SpdSolver::has_factor() const {
#ifdef HCLAB_HAVE_CHOLMOD
  if (impl_->cholmod) return true;
#endif
  return impl_->llt != nullptr;
}

Vector SpdSolver::solve(const Vector& b) const {
  if (static_cast<std::size_t>(b.size()) != impl_->n) throw InvalidArgument("right-hand side size mismatch");
  if (impl_->n == 0) return Vector();
  if (impl_->cg) return impl_->iterative_solve(b);
  Matrix m = b;
  return solve(m).col(0);
}

Matrix SpdSolver::solve(const Matrix& b) const {
  if (static_cast<std::size_t>(b.rows()) != impl_->n) throw InvalidArgument("right-hand side size mismatch");
  if (impl_->n == 0) return Matrix(0, b.cols());
  if (impl_->cg) {
    Matrix x(b.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) x.col(j) = impl_->iterative_solve(b.col(j));
    return x;
  }
  Matrix x;
#ifdef HCLAB_HAVE_CHOLMOD
  if (impl_->cholmod) x = impl_->cholmod->solve(CHOLMOD_A, b);
#endif
  if (impl_->llt) x = impl_->llt->solve(b);
  std::lock_guard lock(impl_->stats_mutex);
  impl_->stats = SolveStats{true, 0, 0.0};
  return x;
}

Matrix SpdSolver::correlate(const Matrix& z) const {
  if (!has_factor()) throw SolverError("Gaussian sampling requires an exact factorization");
  if (static_cast<std::size_t>(z.rows()) != impl_->n) throw InvalidArgument("noise size mismatch");
#ifdef HCLAB_HAVE_CHOLMOD
  if (impl_->cholmod) return impl_->cholmod->solve(CHOLMOD_Pt, impl_->cholmod->solve(CHOLMOD_Lt, z));
#endif
  Matrix y = impl_->llt->matrixU().solve(z);
  return impl_->llt->permutationPinv() * y;
}

SolveStats SpdSolver::last_stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats;
}

std::size_t SpdSolver::factor_nonzeros() const {
#ifdef HCLAB_HAVE_CHOLMOD
  if (impl_->cholmod) return impl_->cholmod->nonzeros();
#endif
  if (impl_->llt) return static_cast<std::size_t>(impl_->llt->matrixL().nestedExpression().nonZeros());
  return 0;
}

std::string direct_backend() {
#ifdef HCLAB_HAVE_CHOLMOD
  std::ostringstream os;
  os << "cholmod " << CHOLMOD_MAIN_VERSION << "." << CHOLMOD_SUB_VERSION << "." << CHOLMOD_SUBSUB_VERSION;
  return os.str();
#else
  return "eigen-simplicial-llt";
#endif
}

}  // namespace hclab
