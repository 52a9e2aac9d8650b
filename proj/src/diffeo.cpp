#include "densops/diffeo.hpp"

#include <algorithm>

namespace densops {

Expr mat_det(const ExprMat& m) {
    std::size_t n = m.size();
    if (n == 0) return Expr::one();
    for (const auto& row : m)
        if (row.size() != n) throw Error("mat_det: matrix is not square");
    if (n == 1) return m[0][0];
    Expr det = Expr::zero(m[0][0].chart());
    for (std::size_t j = 0; j < n; ++j) {
        if (m[0][j].is_zero()) continue;
        ExprMat minor;
        minor.reserve(n - 1);
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<Expr> row;
            row.reserve(n - 1);
            for (std::size_t k = 0; k < n; ++k)
                if (k != j) row.push_back(m[i][k]);
            minor.push_back(std::move(row));
        }
        Expr cof = m[0][j] * mat_det(minor);
        det = (j % 2 == 0) ? det + cof : det - cof;
    }
    return det;
}

ExprMat mat_mul(const ExprMat& a, const ExprMat& b) {
    std::size_t n = a.size(), k = b.size(), mcols = k ? b[0].size() : 0;
    ExprMat out(n, std::vector<Expr>(mcols));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != k) throw Error("mat_mul: shape mismatch");
        for (std::size_t j = 0; j < mcols; ++j) {
            Expr s;
            for (std::size_t l = 0; l < k; ++l) s = s + a[i][l] * b[l][j];
            out[i][j] = s;
        }
    }
    return out;
}

ExprMat mat_inverse(const ExprMat& m) {
    std::size_t n = m.size();
    Expr det = mat_det(m);
    Expr det_inv = det.inv();
    ExprMat out(n, std::vector<Expr>(n));
    if (n == 1) {
        out[0][0] = det_inv;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ExprMat minor;
            minor.reserve(n - 1);
            for (std::size_t r = 0; r < n; ++r) {
                if (r == j) continue;
                std::vector<Expr> row;
                row.reserve(n - 1);
                for (std::size_t c = 0; c < n; ++c)
                    if (c != i) row.push_back(m[r][c]);
                minor.push_back(std::move(row));
            }
            Expr cof = mat_det(minor);
            if ((i + j) % 2 == 1) cof = -cof;
            out[i][j] = cof * det_inv;
        }
    return out;
}

Expr berezinian(const ExprMat& m, int n_even, int n_odd) {
    std::size_t n = static_cast<std::size_t>(n_even + n_odd);
    if (m.size() != n) throw Error("berezinian: shape mismatch");
    auto block = [&](int r0, int c0, int rows, int cols) {
        ExprMat b(static_cast<std::size_t>(rows), std::vector<Expr>(static_cast<std::size_t>(cols)));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) b[i][j] = m[r0 + i][c0 + j];
        return b;
    };
    ExprMat A = block(0, 0, n_even, n_even);
    if (n_odd == 0) return mat_det(A);
    ExprMat B = block(0, n_even, n_even, n_odd);
    ExprMat C = block(n_even, 0, n_odd, n_even);
    ExprMat D = block(n_even, n_even, n_odd, n_odd);
    ExprMat Dinv = mat_inverse(D);
    if (n_even > 0) {
        ExprMat BDC = mat_mul(mat_mul(B, Dinv), C);
        for (int i = 0; i < n_even; ++i)
            for (int j = 0; j < n_even; ++j) A[i][j] = A[i][j] - BDC[i][j];
    }
    return mat_det(A) / mat_det(D);
}

Diffeomorphism::Diffeomorphism(ChartPtr source, ChartPtr target, std::vector<Expr> forward,
                               std::vector<Expr> inverse, bool positive_jacobian)
    : src_(std::move(source)),
      dst_(std::move(target)),
      fwd_(std::move(forward)),
      inv_(std::move(inverse)),
      pos_jac_(positive_jacobian) {
    if (!src_ || !dst_) throw Error("diffeomorphism needs charts on both sides");
    if (src_->n_even() != dst_->n_even() || src_->n_odd() != dst_->n_odd())
        throw ChartMismatch("diffeomorphism between charts of different shape");
    if (src_->n_params() != dst_->n_params())
        throw ChartMismatch("diffeomorphism between charts with different parameters");
    for (int i = 0; i < src_->n_params(); ++i) {
        VarId sp = src_->n_coords() + i;
        if (dst_->find(src_->var_name(sp)) < dst_->n_coords())
            throw ChartMismatch("parameter " + src_->var_name(sp) + " missing on target chart");
    }
    if (fwd_.size() != static_cast<std::size_t>(dst_->n_coords()) ||
        inv_.size() != static_cast<std::size_t>(src_->n_coords()))
        throw Error("diffeomorphism component count mismatch");
    for (int i = 0; i < dst_->n_coords(); ++i) {
        unify_charts(src_, fwd_[static_cast<std::size_t>(i)].chart());
        bool want_odd = dst_->is_odd(i);
        const Expr& e = fwd_[static_cast<std::size_t>(i)];
        if (want_odd ? !e.is_odd() : !e.is_even())
            throw ParityError("forward image of " + dst_->var_name(i) + " has wrong parity");
    }
    for (int i = 0; i < src_->n_coords(); ++i) {
        unify_charts(dst_, inv_[static_cast<std::size_t>(i)].chart());
        bool want_odd = src_->is_odd(i);
        const Expr& e = inv_[static_cast<std::size_t>(i)];
        if (want_odd ? !e.is_odd() : !e.is_even())
            throw ParityError("inverse image of " + src_->var_name(i) + " has wrong parity");
    }
    // both round trips must cancel exactly
    auto fmap = forward_map();
    for (int v = 0; v < src_->n_coords(); ++v) {
        Expr back = inv_[static_cast<std::size_t>(v)].substitute(fmap, src_);
        if (!(back == Expr::of_var(src_, v)))
            throw Error("inverse map does not invert the forward map at " + src_->var_name(v));
    }
    auto imap = inverse_map();
    for (int v = 0; v < dst_->n_coords(); ++v) {
        Expr back = fwd_[static_cast<std::size_t>(v)].substitute(imap, dst_);
        if (!(back == Expr::of_var(dst_, v)))
            throw Error("forward map does not invert the inverse map at " + dst_->var_name(v));
    }
}

std::map<VarId, Expr> Diffeomorphism::forward_map() const {
    std::map<VarId, Expr> m;
    for (int v = 0; v < dst_->n_coords(); ++v) m.emplace(v, fwd_[static_cast<std::size_t>(v)]);
    for (int i = 0; i < dst_->n_params(); ++i) {
        VarId dp = dst_->n_coords() + i;
        m.emplace(dp, Expr::of_var(src_, src_->require(dst_->var_name(dp))));
    }
    return m;
}

std::map<VarId, Expr> Diffeomorphism::inverse_map() const {
    std::map<VarId, Expr> m;
    for (int v = 0; v < src_->n_coords(); ++v) m.emplace(v, inv_[static_cast<std::size_t>(v)]);
    for (int i = 0; i < src_->n_params(); ++i) {
        VarId sp = src_->n_coords() + i;
        m.emplace(sp, Expr::of_var(dst_, dst_->require(src_->var_name(sp))));
    }
    return m;
}

Expr Diffeomorphism::pushforward(const Expr& f) const {
    unify_charts(src_, f.chart());
    return f.substitute(inverse_map(), dst_);
}

Expr Diffeomorphism::pullback(const Expr& g) const {
    unify_charts(dst_, g.chart());
    return g.substitute(forward_map(), src_);
}

Diffeomorphism Diffeomorphism::reversed() const {
    return Diffeomorphism(dst_, src_, inv_, fwd_, pos_jac_);
}

Diffeomorphism Diffeomorphism::compose(const Diffeomorphism& outer, const Diffeomorphism& inner) {
    unify_charts(inner.dst_, outer.src_);
    auto in_fwd = inner.forward_map();
    auto out_inv = outer.inverse_map();
    std::vector<Expr> fwd, inv;
    fwd.reserve(outer.fwd_.size());
    inv.reserve(inner.inv_.size());
    for (const auto& e : outer.fwd_) fwd.push_back(e.substitute(in_fwd, inner.src_));
    for (const auto& e : inner.inv_) inv.push_back(e.substitute(out_inv, outer.dst_));
    return Diffeomorphism(inner.src_, outer.dst_, std::move(fwd), std::move(inv),
                          inner.pos_jac_ && outer.pos_jac_);
}

JacobianData jacobian(const Diffeomorphism& d) {
    int n = d.source()->n_coords();
    JacobianData out;
    out.mat.assign(static_cast<std::size_t>(n), std::vector<Expr>(static_cast<std::size_t>(n)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            out.mat[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                d.forward()[static_cast<std::size_t>(a)].derivative(b);
    out.jac = berezinian(out.mat, d.source()->n_even(), d.source()->n_odd());
    return out;
}

}  // namespace densops
