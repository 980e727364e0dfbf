#pragma once

#include <complex>
#include <initializer_list>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace effsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

// Finite d-dimensional lattice with per-axis open or periodic boundaries.
// Sites are addressed by a linear index in [0, sites()); the last axis is
// fastest (row-major over the coordinate tuple).
struct Lattice {
    int dim = 1;
    std::vector<int> extents;
    std::vector<bool> periodic;

    static Lattice chain(int n, bool wrap = false);
    static Lattice grid2d(int nx, int ny, bool wrap_x = false, bool wrap_y = false);

    int sites() const;
    std::vector<int> coords(int site) const;
    int index(const std::vector<int>& c) const;

    // Manhattan distance, taking the shorter way around on periodic axes.
    int distance(int s1, int s2) const;
};

// Sorted, duplicate-free set of site indices.
class SupportSet {
public:
    SupportSet() = default;
    SupportSet(std::initializer_list<int> s);
    explicit SupportSet(std::vector<int> s);

    const std::vector<int>& sites() const { return sites_; }
    int size() const { return static_cast<int>(sites_.size()); }
    bool empty() const { return sites_.empty(); }
    bool contains(int site) const;
    bool overlaps(const SupportSet& other) const;
    SupportSet unite(const SupportSet& other) const;

    bool operator==(const SupportSet& other) const { return sites_ == other.sites_; }

private:
    std::vector<int> sites_;
};

// One geometrically local term: a support plus either an explicit matrix on
// the tensor factor of that support or just an operator-norm value.
// Explicit matrices live on the ascending-site ordering of the support, with
// the lowest site index as the leftmost (most significant) tensor factor, and
// have dimension 2^|support|.
struct LocalTerm {
    SupportSet support;
    std::optional<Matrix> matrix;
    double norm = 0.0;

    static LocalTerm scalar(SupportSet support, double norm);
    static LocalTerm dense(SupportSet support, Matrix m);
};

struct LocalityBounds {
    double a = 1.0;  // diameter bound
    double Z = 1.0;  // overlap (coordination) bound
    double J = 1.0;  // per-term norm bound
};

// Sum of local terms with an optional declared (a, Z, J) profile. The term
// decomposition is part of the value: norms below depend on it on purpose.
struct LocalOperator {
    Lattice lattice;
    std::vector<LocalTerm> terms;
    std::optional<LocalityBounds> bounds;

    // Throws if a declared bound is violated by the stored terms.
    void check() const;
};

struct Geometry {
    int distance = 0;
    int diamA = 0;
    int diamB = 0;
};

Geometry geometry(const Lattice& lat, const SupportSet& A, const SupportSet& B);

// sup over sites of the summed norms of the terms touching that site.
double star_norm(const LocalOperator& A);

// Pairwise commutators [a, b] of overlapping terms, each embedded on the
// union support. Requires explicit matrices on both sides.
LocalOperator commutator_local(const LocalOperator& A, const LocalOperator& B);

// c_LR = 4 e J Z a.
double lr_velocity(double a, double Z, double J);

// nu_d(x) = 2^{d+1} e / (d-1)! * sum_n (n+d-1)^{d-1} f_x(n) with f_x(n) = 1
// for n <= x and exp((x-n)/a) beyond; summed until the geometric tail bound
// drops below tail_tol.
double nu_d(double x, int d, double a, double tail_tol = 1e-12);

// (e/Z) |X| ||O|| ||K|| exp((c_LR t - dist)/a).
double lr_observable_bound(int sizeX, double normO, double normK, double t,
                           int dist, double a, double Z, double c_LR);

// Kronecker product, left factor most significant.
Matrix kron(const Matrix& a, const Matrix& b);

// Embeds a matrix living on `from` into the larger support `to` (from must be
// a subset of to), padding the remaining factors with identities.
Matrix embed(const Matrix& m, const SupportSet& from, const SupportSet& to);

// Largest singular value.
double operator_norm(const Matrix& m);

// Conjugates every term by a layer of disjointly supported gates, enlarging
// each support by the gates it touches.
LocalOperator conjugate_by_layer(const LocalOperator& A,
                                 const std::vector<std::pair<SupportSet, Matrix>>& gates);

}  // namespace effsim
