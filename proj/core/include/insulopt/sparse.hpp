#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace insulopt {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

// Symmetric sparse matrix in compressed-row form; both triangles are stored
// so products need no branch on the diagonal. Construction coalesces
// duplicate triplets and enforces symmetry to 1e-14 relative.
class SymmetricSparseMatrix {
public:
    SymmetricSparseMatrix() = default;

    static SymmetricSparseMatrix from_triplets(int n, std::vector<Triplet> entries);
    static SymmetricSparseMatrix diagonal(Vector d);
    // a*A + b*B with merged sparsity pattern.
    static SymmetricSparseMatrix weighted_sum(const SymmetricSparseMatrix& A, double a,
                                              const SymmetricSparseMatrix& B, double b);

    int dim() const { return n_; }
    int nonzeros() const { return static_cast<int>(val_.size()); }

    void multiply(const Vector& x, Vector& y) const;
    Vector operator*(const Vector& x) const;
    double quadratic_form(const Vector& x) const; // x' A x

    Vector diagonal_vector() const;
    double trace() const;
    double at(int i, int j) const; // 0 if not stored

    // Principal submatrix on the kept indices (ascending mesh order).
    SymmetricSparseMatrix restrict_to(const std::vector<int>& keep) const;

private:
    int n_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_;
    std::vector<double> val_;
};

struct CgStats {
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> residual_history; // ||r||/||b|| per iteration
};

// Jacobi-preconditioned conjugate gradients for SPD systems. Returns x with
// ||Ax - b|| <= tol * ||b|| (true residual, re-checked at exit). Optional x0
// warm start. Throws SolverError on non-convergence, std::invalid_argument on
// shape mismatch.
Vector cg_solve(const SymmetricSparseMatrix& A, const Vector& b, double tol = 1e-10,
                int max_iter = 50000, const Vector* x0 = nullptr, CgStats* stats = nullptr);

struct EigOptions {
    double tol = 1e-9;             // eigenvalue residual: ||Av - lambda*Mv|| <= tol*||Av||
    double value_change_tol = 1e-10; // and relative eigenvalue stagnation below this
    int max_iter = 2000;
    double cg_tol = 1e-10;
    int cg_max_iter = 50000;
    std::uint64_t seed = 0x5eed0001u;
    const Vector* initial = nullptr; // warm start (projected and normalized internally)
};

struct EigPair {
    double value = 0.0;
    Vector vector;
    int iterations = 0;
    double residual = 0.0; // final relative eigenvalue residual
};

// Smallest eigenpair of A v = lambda M v on the M-orthogonal complement of
// the deflation space, by blocked (size 2) shift-and-invert power iteration
// with CG inner solves. Deflation vectors must span an invariant subspace of
// the pencil (eigenvectors or a nullspace, e.g. constants for a Neumann
// stiffness matrix); they are M-orthonormalized internally. The inner
// operator is A + sigma*M with sigma = 1e-8*trace(A)/n when deflation vectors
// are given (A may then be singular), 0 otherwise. The returned vector
// satisfies v'Mv = 1 and the eigenvalue is its exact Rayleigh quotient.
EigPair eig_smallest(const SymmetricSparseMatrix& A, const SymmetricSparseMatrix& M,
                     std::span<const Vector> deflation, const EigOptions& opt = {});

} // namespace insulopt
