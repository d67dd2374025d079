#pragma once

#include "padic_core.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

namespace nchar {

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, T(0)) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init)
    {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        for (const auto& row : init) {
            if (row.size() != cols_) throw DomainError("ragged matrix literal");
            for (const auto& x : row) a_.push_back(x);
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    friend bool operator==(const Matrix& x, const Matrix& y)
    {
        return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
    }

    Matrix operator+(const Matrix& o) const
    {
        check_same(o);
        Matrix r = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
        return r;
    }
    Matrix operator-(const Matrix& o) const
    {
        check_same(o);
        Matrix r = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
        return r;
    }
    Matrix operator*(const Matrix& o) const
    {
        if (cols_ != o.rows_) throw DomainError("matrix shape mismatch in product");
        Matrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const T& x = (*this)(i, k);
                if (x == 0) continue;
                for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += x * o(k, j);
            }
        return r;
    }
    Matrix scaled(const T& s) const
    {
        Matrix r = *this;
        for (auto& x : r.a_) x *= s;
        return r;
    }
    Matrix transpose() const
    {
        Matrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }
    bool is_zero() const
    {
        return std::all_of(a_.begin(), a_.end(), [](const T& x) { return x == 0; });
    }
    std::vector<T> column(std::size_t j) const
    {
        std::vector<T> v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

private:
    void check_same(const Matrix& o) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DomainError("matrix shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> a_;
};

using QMatrix = Matrix<Q>;
using ZMatrix = Matrix<Z>;

inline QMatrix to_q(const ZMatrix& m)
{
    QMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Q(m(i, j));
    return r;
}

inline QMatrix matrix_power(const QMatrix& m, long e)
{
    QMatrix r = QMatrix::identity(m.rows());
    for (long i = 0; i < e; ++i) r = r * m;
    return r;
}

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(QMatrix& m)
{
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t sel = row;
        while (sel < m.rows() && m(sel, col) == 0) ++sel;
        if (sel == m.rows()) continue;
        if (sel != row)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(sel, j), m(row, j));
        Q inv = Q(1) / m(row, col);
        for (std::size_t j = 0; j < m.cols(); ++j) m(row, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == row || m(i, col) == 0) continue;
            Q f = m(i, col);
            for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= f * m(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

inline std::size_t rank(QMatrix m) { return rref(m).size(); }

inline std::optional<QMatrix> inverse(const QMatrix& m)
{
    std::size_t n = m.rows();
    if (m.cols() != n) throw DomainError("inverse of a non-square matrix");
    QMatrix aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n + i) = 1;
    }
    auto piv = rref(aug);
    if (piv.size() < n || piv[n - 1] != n - 1) return std::nullopt;
    QMatrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = aug(i, n + j);
    return r;
}

// Solves A x = B for A of full column rank; nullopt if inconsistent.
inline std::optional<QMatrix> solve(const QMatrix& a, const QMatrix& b)
{
    if (a.rows() != b.rows()) throw DomainError("solve: shape mismatch");
    std::size_t n = a.cols(), k = b.cols();
    QMatrix aug(a.rows(), n + k);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        for (std::size_t j = 0; j < k; ++j) aug(i, n + j) = b(i, j);
    }
    auto piv = rref(aug);
    std::size_t lead = 0;
    while (lead < piv.size() && piv[lead] < n) ++lead;
    if (lead != n) throw DomainError("solve: coefficient matrix lacks full column rank");
    if (lead < piv.size()) return std::nullopt;
    QMatrix x(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) x(i, j) = aug(i, n + j);
    return x;
}

// Invariant factors (nonzero diagonal of the Smith normal form) of an integer matrix.
inline std::vector<Z> smith_invariants(ZMatrix m)
{
    const std::size_t R = m.rows(), C = m.cols();
    std::vector<Z> diag;
    for (std::size_t t = 0; t < std::min(R, C); ++t) {
        for (;;) {
            // smallest nonzero entry of the trailing block as pivot
            std::size_t pi = R, pj = C;
            for (std::size_t i = t; i < R; ++i)
                for (std::size_t j = t; j < C; ++j)
                    if (m(i, j) != 0 && (pi == R || abs(m(i, j)) < abs(m(pi, pj)))) pi = i, pj = j;
            if (pi == R) return diag;
            for (std::size_t j = 0; j < C; ++j) std::swap(m(t, j), m(pi, j));
            for (std::size_t i = 0; i < R; ++i) std::swap(m(i, t), m(i, pj));
            bool clean = true;
            for (std::size_t i = t + 1; i < R; ++i) {
                Z q = m(i, t) / m(t, t);
                if (q != 0)
                    for (std::size_t j = t; j < C; ++j) m(i, j) -= q * m(t, j);
                if (m(i, t) != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < C; ++j) {
                Z q = m(t, j) / m(t, t);
                if (q != 0)
                    for (std::size_t i = t; i < R; ++i) m(i, j) -= q * m(i, t);
                if (m(t, j) != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility condition on the trailing block
            std::size_t bad = R;
            for (std::size_t i = t + 1; i < R && bad == R; ++i)
                for (std::size_t j = t + 1; j < C; ++j)
                    if (m(i, j) % m(t, t) != 0) {
                        bad = i;
                        break;
                    }
            if (bad == R) break;
            for (std::size_t j = t; j < C; ++j) m(t, j) += m(bad, j);
        }
        diag.push_back(abs(m(t, t)));
    }
    return diag;
}

// Column-sparse square matrix over Q.
class SparseMatrix {
public:
    using Column = std::map<std::size_t, Q>;

    SparseMatrix() = default;
    explicit SparseMatrix(std::size_t n) : cols_(n) {}

    static SparseMatrix identity(std::size_t n)
    {
        SparseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m.cols_[i][i] = 1;
        return m;
    }

    std::size_t size() const { return cols_.size(); }

    void add(std::size_t row, std::size_t col, const Q& v)
    {
        if (v == 0) return;
        auto& c = cols_.at(col);
        auto [it, fresh] = c.try_emplace(row, v);
        if (!fresh) {
            it->second += v;
            if (it->second == 0) c.erase(it);
        }
    }

    Q get(std::size_t row, std::size_t col) const
    {
        const auto& c = cols_.at(col);
        auto it = c.find(row);
        return it == c.end() ? Q(0) : it->second;
    }

    const Column& column(std::size_t j) const { return cols_.at(j); }
    Column& column(std::size_t j) { return cols_.at(j); }

    Q trace() const
    {
        Q t = 0;
        for (std::size_t j = 0; j < cols_.size(); ++j) t += get(j, j);
        return t;
    }

    SparseMatrix operator*(const SparseMatrix& o) const
    {
        if (size() != o.size()) throw DomainError("sparse product shape mismatch");
        SparseMatrix r(size());
        for (std::size_t j = 0; j < size(); ++j)
            for (const auto& [k, v] : o.cols_[j])
                for (const auto& [i, w] : cols_[k]) r.add(i, j, w * v);
        return r;
    }

    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) { return a.cols_ == b.cols_; }

    QMatrix dense() const
    {
        QMatrix d(size(), size());
        for (std::size_t j = 0; j < size(); ++j)
            for (const auto& [i, v] : cols_[j]) d(i, j) = v;
        return d;
    }

private:
    std::vector<Column> cols_;
};

} // namespace nchar
