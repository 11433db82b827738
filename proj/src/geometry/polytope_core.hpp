#pragma once

// Brute-force facet/vertex enumeration and pulling triangulation, generic in
// the scalar so the same code runs on doubles and on GMP rationals.

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace santalo::geometry::core {

using Rational = boost::multiprecision::mpq_rational;

template <class T>
using Point = std::vector<T>;

inline double abs_of(double x) { return std::fabs(x); }
inline Rational abs_of(const Rational& x) { return boost::multiprecision::abs(x); }

template <class T>
T dot(const Point<T>& a, const Point<T>& b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <class T>
Point<T> sub(const Point<T>& a, const Point<T>& b) {
    Point<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

// Row-reduce in place; returns rank. Entries with |x| <= tol count as zero.
template <class T>
int row_reduce(std::vector<Point<T>>& rows, int cols, const T& tol, std::vector<int>* pivots = nullptr) {
    int r = 0;
    const int m = static_cast<int>(rows.size());
    for (int c = 0; c < cols && r < m; ++c) {
        int best = -1;
        T best_val = tol;
        for (int i = r; i < m; ++i) {
            T v = abs_of(rows[i][c]);
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        if (best < 0) continue;
        std::swap(rows[r], rows[best]);
        T piv = rows[r][c];
        const int width = static_cast<int>(rows[r].size());
        for (int j = c; j < width; ++j) rows[r][j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            T f = rows[i][c];
            if (f == 0) continue;
            for (int j = c; j < width; ++j) rows[i][j] -= f * rows[r][j];
        }
        if (pivots) pivots->push_back(c);
        ++r;
    }
    return r;
}

template <class T>
int affine_rank(const std::vector<Point<T>>& pts, const std::vector<int>& idx, int d, const T& tol) {
    if (idx.size() <= 1) return 0;
    std::vector<Point<T>> rows;
    rows.reserve(idx.size() - 1);
    for (std::size_t k = 1; k < idx.size(); ++k) rows.push_back(sub(pts[idx[k]], pts[idx[0]]));
    return row_reduce(rows, d, tol);
}

// Normal of the hyperplane through d points (rank d-1 required).
template <class T>
bool hyperplane_normal(const std::vector<Point<T>>& pts, const std::vector<int>& idx, int d, const T& tol,
                       Point<T>& normal) {
    std::vector<Point<T>> rows;
    for (std::size_t k = 1; k < idx.size(); ++k) rows.push_back(sub(pts[idx[k]], pts[idx[0]]));
    std::vector<int> piv;
    int r = row_reduce(rows, d, tol, &piv);
    if (r != d - 1) return false;
    int free_col = 0;
    for (int c = 0; c < d; ++c) {
        if (std::find(piv.begin(), piv.end(), c) == piv.end()) {
            free_col = c;
            break;
        }
    }
    normal.assign(d, T(0));
    normal[free_col] = 1;
    for (int i = 0; i < r; ++i) normal[piv[i]] = -rows[i][free_col];
    return true;
}

template <class T>
struct Hull {
    int d = 0;
    std::vector<Point<T>> vertices;
    std::vector<Point<T>> normals;  // not normalized
    std::vector<T> offsets;
    std::vector<std::vector<int>> facet_vertices;
    std::vector<std::vector<int>> simplices;
};

inline bool next_combination(std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) return false;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    return true;
}

// Facets of conv(pts). dist_tol bounds |a.p - b| / |a| for incidence; with
// rationals pass zero. Returns false if the point set is not full-dimensional.
template <class T>
bool facets_of_points(int d, const std::vector<Point<T>>& pts, const T& rank_tol, double dist_tol,
                      Hull<T>& hull) {
    const int n = static_cast<int>(pts.size());
    if (n < d + 1) return false;
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    if (affine_rank(pts, all, d, rank_tol) < d) return false;

    Point<T> c(d, T(0));
    for (const auto& p : pts)
        for (int i = 0; i < d; ++i) c[i] += p[i];
    for (int i = 0; i < d; ++i) c[i] /= n;

    std::vector<std::vector<std::uint8_t>> member;  // incidence bitmaps of found facets
    std::vector<int> comb(d);
    std::iota(comb.begin(), comb.end(), 0);
    do {
        bool covered = false;
        for (const auto& m : member) {
            bool all_in = true;
            for (int k : comb)
                if (!m[k]) {
                    all_in = false;
                    break;
                }
            if (all_in) {
                covered = true;
                break;
            }
        }
        if (covered) continue;
        Point<T> a;
        if (!hyperplane_normal(pts, comb, d, rank_tol, a)) continue;
        T b = dot(a, pts[comb[0]]);
        T side = dot(a, c) - b;
        if (side == 0) continue;
        if (side > 0) {
            for (auto& x : a) x = -x;
            b = -b;
        }
        T scale;
        if constexpr (std::is_same_v<T, double>) {
            scale = std::sqrt(dot(a, a));
        } else {
            scale = 1;
        }
        bool ok = true;
        std::vector<std::uint8_t> inc(n, 0);
        for (int i = 0; i < n && ok; ++i) {
            T gap = dot(a, pts[i]) - b;
            if constexpr (std::is_same_v<T, double>) {
                double g = gap / scale;
                if (g > dist_tol) ok = false;
                else if (g >= -dist_tol) inc[i] = 1;
            } else {
                if (gap > 0) ok = false;
                else if (gap == 0) inc[i] = 1;
            }
        }
        if (!ok) continue;
        std::vector<int> fv;
        for (int i = 0; i < n; ++i)
            if (inc[i]) fv.push_back(i);
        if (affine_rank(pts, fv, d, rank_tol) != d - 1) continue;
        member.push_back(inc);
        hull.normals.push_back(a);
        hull.offsets.push_back(b);
        hull.facet_vertices.push_back(fv);
    } while (next_combination(comb, n));
    return !member.empty();
}

// Keep only extreme points: those whose incident facet normals span R^d.
template <class T>
void prune_to_vertices(Hull<T>& hull, const std::vector<Point<T>>& pts, const T& rank_tol) {
    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<int>> incident(n);
    for (std::size_t f = 0; f < hull.facet_vertices.size(); ++f)
        for (int v : hull.facet_vertices[f]) incident[v].push_back(static_cast<int>(f));
    std::vector<int> remap(n, -1);
    for (int i = 0; i < n; ++i) {
        std::vector<Point<T>> rows;
        for (int f : incident[i]) rows.push_back(hull.normals[f]);
        if (static_cast<int>(rows.size()) < hull.d) continue;
        if (row_reduce(rows, hull.d, rank_tol) < hull.d) continue;
        // duplicates of an existing vertex are dropped
        bool dup = false;
        for (std::size_t j = 0; j < hull.vertices.size() && !dup; ++j) {
            Point<T> diff = sub(pts[i], hull.vertices[j]);
            T m = 0;
            for (auto& x : diff) m = std::max(m, abs_of(x));
            if (m <= rank_tol) {
                dup = true;
                remap[i] = static_cast<int>(j);
            }
        }
        if (dup) continue;
        remap[i] = static_cast<int>(hull.vertices.size());
        hull.vertices.push_back(pts[i]);
    }
    for (auto& fv : hull.facet_vertices) {
        std::vector<int> out;
        for (int v : fv)
            if (remap[v] >= 0) out.push_back(remap[v]);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        fv = out;
    }
}

// Pulling triangulation of a face given by its vertex set S of dimension k.
template <class T>
void triangulate_face(const Hull<T>& hull, const std::vector<int>& S, int k, const T& rank_tol,
                      std::vector<std::vector<int>>& out) {
    if (k == 0) {
        out.push_back({S.front()});
        return;
    }
    const int apex = S.front();
    std::vector<std::vector<int>> subfaces;
    for (const auto& fv : hull.facet_vertices) {
        std::vector<int> t;
        std::set_intersection(S.begin(), S.end(), fv.begin(), fv.end(), std::back_inserter(t));
        if (t.size() < static_cast<std::size_t>(k) || t.size() == S.size()) continue;
        if (std::binary_search(t.begin(), t.end(), apex)) continue;
        if (affine_rank(hull.vertices, t, hull.d, rank_tol) != k - 1) continue;
        if (std::find(subfaces.begin(), subfaces.end(), t) != subfaces.end()) continue;
        subfaces.push_back(std::move(t));
    }
    for (const auto& t : subfaces) {
        std::vector<std::vector<int>> part;
        triangulate_face(hull, t, k - 1, rank_tol, part);
        for (auto& s : part) {
            s.insert(s.begin(), apex);
            out.push_back(std::move(s));
        }
    }
}

template <class T>
void triangulate(Hull<T>& hull, const T& rank_tol) {
    std::vector<int> all(hull.vertices.size());
    std::iota(all.begin(), all.end(), 0);
    hull.simplices.clear();
    triangulate_face(hull, all, hull.d, rank_tol, hull.simplices);
}

// Signed d!-scaled volume: det(v1-v0, ..., vd-v0).
template <class T>
T simplex_det(const std::vector<Point<T>>& pts, const std::vector<int>& s, int d) {
    std::vector<Point<T>> m;
    for (int k = 1; k <= d; ++k) m.push_back(sub(pts[s[k]], pts[s[0]]));
    T det = 1;
    for (int c = 0; c < d; ++c) {
        int best = c;
        for (int i = c + 1; i < d; ++i)
            if (abs_of(m[i][c]) > abs_of(m[best][c])) best = i;
        if (m[best][c] == 0) return T(0);
        if (best != c) {
            std::swap(m[best], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (int i = c + 1; i < d; ++i) {
            T f = m[i][c] / m[c][c];
            for (int j = c; j < d; ++j) m[i][j] -= f * m[c][j];
        }
    }
    return det;
}

template <class T>
T hull_volume(const Hull<T>& hull) {
    T total = 0;
    T fact = 1;
    for (int k = 2; k <= hull.d; ++k) fact *= k;
    for (const auto& s : hull.simplices) total += abs_of(simplex_det(hull.vertices, s, hull.d));
    return total / fact;
}

// Vertices of {x : a_i.x <= b_i} by brute force over d-subsets of halfspaces.
template <class T>
std::vector<Point<T>> vertices_of_halfspaces(int d, const std::vector<Point<T>>& normals,
                                             const std::vector<T>& offsets, const T& rank_tol,
                                             double dist_tol) {
    const int m = static_cast<int>(normals.size());
    std::vector<Point<T>> out;
    if (m < d + 1) return out;
    std::vector<int> comb(d);
    std::iota(comb.begin(), comb.end(), 0);
    do {
        std::vector<Point<T>> rows;
        for (int k : comb) {
            Point<T> r = normals[k];
            r.push_back(offsets[k]);
            rows.push_back(std::move(r));
        }
        std::vector<int> piv;
        int r = row_reduce(rows, d, rank_tol, &piv);
        if (r < d) continue;
        Point<T> x(d);
        for (int i = 0; i < d; ++i) x[piv[i]] = rows[i][d];
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
            T g = dot(normals[i], x) - offsets[i];
            if constexpr (std::is_same_v<T, double>) {
                if (g / std::sqrt(dot(normals[i], normals[i])) > dist_tol) ok = false;
            } else {
                if (g > 0) ok = false;
            }
        }
        if (ok) out.push_back(std::move(x));
    } while (next_combination(comb, m));
    return out;
}

}  // namespace santalo::geometry::core
