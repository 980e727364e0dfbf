#include "effsim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace effsim {

Lattice Lattice::chain(int n, bool wrap) {
    if (n < 1) throw std::invalid_argument("chain length must be positive");
    Lattice lat;
    lat.dim = 1;
    lat.extents = {n};
    lat.periodic = {wrap};
    return lat;
}

Lattice Lattice::grid2d(int nx, int ny, bool wrap_x, bool wrap_y) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("grid extents must be positive");
    Lattice lat;
    lat.dim = 2;
    lat.extents = {nx, ny};
    lat.periodic = {wrap_x, wrap_y};
    return lat;
}

int Lattice::sites() const {
    int n = 1;
    for (int e : extents) n *= e;
    return n;
}

std::vector<int> Lattice::coords(int site) const {
    if (site < 0 || site >= sites()) throw std::out_of_range("site index out of range");
    std::vector<int> c(dim);
    for (int k = dim - 1; k >= 0; --k) {
        c[k] = site % extents[k];
        site /= extents[k];
    }
    return c;
}

int Lattice::index(const std::vector<int>& c) const {
    if (static_cast<int>(c.size()) != dim) throw std::invalid_argument("coordinate rank mismatch");
    int site = 0;
    for (int k = 0; k < dim; ++k) {
        if (c[k] < 0 || c[k] >= extents[k]) throw std::out_of_range("coordinate out of range");
        site = site * extents[k] + c[k];
    }
    return site;
}

int Lattice::distance(int s1, int s2) const {
    const auto c1 = coords(s1);
    const auto c2 = coords(s2);
    int d = 0;
    for (int k = 0; k < dim; ++k) {
        int delta = std::abs(c1[k] - c2[k]);
        if (periodic[k]) delta = std::min(delta, extents[k] - delta);
        d += delta;
    }
    return d;
}

SupportSet::SupportSet(std::initializer_list<int> s) : SupportSet(std::vector<int>(s)) {}

SupportSet::SupportSet(std::vector<int> s) : sites_(std::move(s)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    if (!sites_.empty() && sites_.front() < 0)
        throw std::invalid_argument("negative site index");
}

bool SupportSet::contains(int site) const {
    return std::binary_search(sites_.begin(), sites_.end(), site);
}

bool SupportSet::overlaps(const SupportSet& other) const {
    auto a = sites_.begin();
    auto b = other.sites_.begin();
    while (a != sites_.end() && b != other.sites_.end()) {
        if (*a == *b) return true;
        if (*a < *b) ++a; else ++b;
    }
    return false;
}

SupportSet SupportSet::unite(const SupportSet& other) const {
    std::vector<int> merged;
    merged.reserve(sites_.size() + other.sites_.size());
    std::set_union(sites_.begin(), sites_.end(),
                   other.sites_.begin(), other.sites_.end(),
                   std::back_inserter(merged));
    return SupportSet(std::move(merged));
}

LocalTerm LocalTerm::scalar(SupportSet support, double norm) {
    if (support.empty()) throw std::invalid_argument("empty support");
    if (norm < 0) throw std::invalid_argument("negative norm");
    LocalTerm t;
    t.support = std::move(support);
    t.norm = norm;
    return t;
}

LocalTerm LocalTerm::dense(SupportSet support, Matrix m) {
    if (support.empty()) throw std::invalid_argument("empty support");
    const auto dim = static_cast<Eigen::Index>(1) << support.size();
    if (m.rows() != dim || m.cols() != dim)
        throw std::invalid_argument("matrix dimension does not match 2^|support|");
    LocalTerm t;
    t.support = std::move(support);
    t.norm = operator_norm(m);
    t.matrix = std::move(m);
    return t;
}

static int support_diameter(const Lattice& lat, const SupportSet& s) {
    int diam = 0;
    const auto& v = s.sites();
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = i + 1; j < v.size(); ++j)
            diam = std::max(diam, lat.distance(v[i], v[j]));
    return diam;
}

void LocalOperator::check() const {
    for (const auto& t : terms) {
        if (t.support.empty()) throw std::invalid_argument("empty support");
        if (t.support.sites().back() >= lattice.sites())
            throw std::invalid_argument("term support outside lattice");
    }
    if (!bounds) return;
    const auto& b = *bounds;
    for (size_t i = 0; i < terms.size(); ++i) {
        if (support_diameter(lattice, terms[i].support) > b.a + 1e-9)
            throw std::invalid_argument("term " + std::to_string(i) + " exceeds diameter bound a");
        if (terms[i].norm > b.J + 1e-12)
            throw std::invalid_argument("term " + std::to_string(i) + " exceeds strength bound J");
        int overlapping = 0;
        for (size_t j = 0; j < terms.size(); ++j)
            if (j != i && terms[i].support.overlaps(terms[j].support)) ++overlapping;
        if (overlapping > b.Z + 1e-9)
            throw std::invalid_argument("term " + std::to_string(i) + " exceeds overlap bound Z");
    }
}

Geometry geometry(const Lattice& lat, const SupportSet& A, const SupportSet& B) {
    if (A.empty() || B.empty()) throw std::invalid_argument("empty support");
    Geometry g;
    g.distance = std::numeric_limits<int>::max();
    for (int x : A.sites())
        for (int y : B.sites())
            g.distance = std::min(g.distance, lat.distance(x, y));
    g.diamA = support_diameter(lat, A);
    g.diamB = support_diameter(lat, B);
    return g;
}

double star_norm(const LocalOperator& A) {
    const int n = A.lattice.sites();
    std::vector<double> per_site(n, 0.0);
    for (const auto& t : A.terms)
        for (int x : t.support.sites())
            per_site[x] += t.norm;
    double best = 0.0;
    for (double v : per_site) best = std::max(best, v);
    return best;
}

LocalOperator commutator_local(const LocalOperator& A, const LocalOperator& B) {
    for (const auto& ops : {&A.terms, &B.terms})
        for (const auto& t : *ops)
            if (!t.matrix) throw std::invalid_argument("explicit matrices required");
    LocalOperator C;
    C.lattice = A.lattice;
    for (const auto& a : A.terms) {
        for (const auto& b : B.terms) {
            if (!a.support.overlaps(b.support)) continue;
            const SupportSet u = a.support.unite(b.support);
            const Matrix ma = embed(*a.matrix, a.support, u);
            const Matrix mb = embed(*b.matrix, b.support, u);
            C.terms.push_back(LocalTerm::dense(u, ma * mb - mb * ma));
        }
    }
    return C;
}

double lr_velocity(double a, double Z, double J) {
    if (a <= 0 || Z <= 0 || J <= 0)
        throw std::invalid_argument("lr_velocity requires positive a, Z, J");
    return 4.0 * std::exp(1.0) * J * Z * a;
}

double nu_d(double x, int d, double a, double tail_tol) {
    if (x < 0 || d < 1 || a <= 0) throw std::invalid_argument("nu_d domain violation");
    double lfact = 0.0;
    for (int k = 2; k < d; ++k) lfact += std::log(static_cast<double>(k));
    const double prefactor = std::exp((d + 1) * std::log(2.0) + 1.0 - lfact);
    const double decay = std::exp(-1.0 / a);
    double sum = 0.0;
    for (int n = 0;; ++n) {
        const double poly = std::pow(static_cast<double>(n + d - 1), d - 1);
        const double f = (n <= x) ? 1.0 : std::exp((x - n) / a);
        const double term = poly * f;
        sum += term;
        if (n > x) {
            // terms beyond n shrink at least geometrically once the ratio
            // dips below one, giving a closed-form bound on the remainder
            const double ratio =
                std::pow((n + d) / static_cast<double>(n + d - 1), d - 1) * decay;
            if (ratio < 1.0 && prefactor * term * ratio / (1.0 - ratio) < tail_tol) break;
        }
    }
    return prefactor * sum;
}

double lr_observable_bound(int sizeX, double normO, double normK, double t,
                           int dist, double a, double Z, double c_LR) {
    if (sizeX < 0 || normO < 0 || normK < 0 || t < 0 || dist < 0 || a <= 0 || Z <= 0 || c_LR < 0)
        throw std::invalid_argument("lr_observable_bound domain violation");
    return std::exp(1.0) / Z * sizeX * normO * normK * std::exp((c_LR * t - dist) / a);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix embed(const Matrix& m, const SupportSet& from, const SupportSet& to) {
    const auto& f = from.sites();
    const auto& g = to.sites();
    std::vector<int> pos;  // position of each `from` site within `to`
    pos.reserve(f.size());
    {
        size_t j = 0;
        for (int site : f) {
            while (j < g.size() && g[j] != site) ++j;
            if (j == g.size()) throw std::invalid_argument("embed: support is not a subset");
            pos.push_back(static_cast<int>(j));
        }
    }
    const int kf = from.size();
    const int kg = to.size();
    const auto dim = static_cast<Eigen::Index>(1) << kg;
    Matrix out = Matrix::Zero(dim, dim);
    // bit kg-1-j of a row index carries site g[j] (leftmost factor is the
    // most significant bit)
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            bool identity_ok = true;
            for (int j = 0; j < kg && identity_ok; ++j) {
                const int shift = kg - 1 - j;
                const bool in_from = std::find(pos.begin(), pos.end(), j) != pos.end();
                if (!in_from && (((r >> shift) & 1) != ((c >> shift) & 1))) identity_ok = false;
            }
            if (!identity_ok) continue;
            Eigen::Index mr = 0, mc = 0;
            for (int i = 0; i < kf; ++i) {
                const int shift = kg - 1 - pos[i];
                mr = (mr << 1) | ((r >> shift) & 1);
                mc = (mc << 1) | ((c >> shift) & 1);
            }
            out(r, c) = m(mr, mc);
        }
    }
    return out;
}

double operator_norm(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

LocalOperator conjugate_by_layer(const LocalOperator& A,
                                 const std::vector<std::pair<SupportSet, Matrix>>& gates) {
    for (size_t i = 0; i < gates.size(); ++i)
        for (size_t j = i + 1; j < gates.size(); ++j)
            if (gates[i].first.overlaps(gates[j].first))
                throw std::invalid_argument("gate supports must be disjoint");
    LocalOperator out;
    out.lattice = A.lattice;
    for (const auto& t : A.terms) {
        if (!t.matrix) throw std::invalid_argument("explicit matrices required");
        SupportSet enlarged = t.support;
        std::vector<const std::pair<SupportSet, Matrix>*> touching;
        for (const auto& gate : gates) {
            if (gate.first.overlaps(t.support)) {
                enlarged = enlarged.unite(gate.first);
                touching.push_back(&gate);
            }
        }
        const auto dim = static_cast<Eigen::Index>(1) << enlarged.size();
        Matrix u = Matrix::Identity(dim, dim);
        for (const auto* gate : touching) u = embed(gate->second, gate->first, enlarged) * u;
        const Matrix m = embed(*t.matrix, t.support, enlarged);
        out.terms.push_back(LocalTerm::dense(enlarged, u * m * u.adjoint()));
    }
    return out;
}

}  // namespace effsim
