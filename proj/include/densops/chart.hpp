#pragma once

#include <memory>
#include <string>
#include <vector>

#include "densops/base.hpp"

namespace densops {

// A coordinate chart: even coordinates, odd (Grassmann) coordinates and even
// parameters (symbolic constants that are not part of the geometry: operator
// sums, Jacobians and derivative multi-indices range over coordinates only).
//
// Variable ids are indices into the combined list:
//   [0, n_even)                      even coordinates
//   [n_even, n_even + n_odd)         odd coordinates
//   [n_even + n_odd, n_vars)         parameters
class Chart {
public:
    Chart(std::string name, std::vector<std::string> even_vars,
          std::vector<std::string> odd_vars = {}, std::vector<std::string> params = {});

    const std::string& name() const { return name_; }
    int n_even() const { return n_even_; }
    int n_odd() const { return n_odd_; }
    int n_params() const { return static_cast<int>(names_.size()) - n_even_ - n_odd_; }
    int n_vars() const { return static_cast<int>(names_.size()); }
    int n_coords() const { return n_even_ + n_odd_; }

    bool is_odd(VarId v) const { return v >= n_even_ && v < n_even_ + n_odd_; }
    bool is_param(VarId v) const { return v >= n_even_ + n_odd_; }
    bool is_coord(VarId v) const { return v >= 0 && v < n_even_ + n_odd_; }
    Parity parity(VarId v) const { return is_odd(v) ? Parity::Odd : Parity::Even; }

    // odd index in [0, n_odd) for mask bookkeeping
    int odd_index(VarId v) const { return v - n_even_; }
    VarId odd_var(int odd_idx) const { return n_even_ + odd_idx; }

    const std::string& var_name(VarId v) const { return names_.at(v); }
    // returns -1 if the name is unknown
    VarId find(const std::string& name) const;
    VarId require(const std::string& name) const;
    void check_var(VarId v) const {
        if (v < 0 || v >= n_vars()) throw Error("variable id out of range for chart " + name_);
    }

    // all coordinate ids, evens first then odds
    std::vector<VarId> coords() const;
    std::vector<VarId> even_coords() const;
    std::vector<VarId> odd_coords() const;

private:
    std::string name_;
    std::vector<std::string> names_;
    int n_even_ = 0;
    int n_odd_ = 0;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::string name, std::vector<std::string> even_vars,
                    std::vector<std::string> odd_vars = {},
                    std::vector<std::string> params = {});

// The common chart of two operands (either may be null for constants).
// Throws ChartMismatch if both are set and differ.
ChartPtr unify_charts(const ChartPtr& a, const ChartPtr& b);

}  // namespace densops
