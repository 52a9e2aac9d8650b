#include "densops/chart.hpp"

#include <set>

namespace densops {

Chart::Chart(std::string name, std::vector<std::string> even_vars,
             std::vector<std::string> odd_vars, std::vector<std::string> params)
    : name_(std::move(name)) {
    n_even_ = static_cast<int>(even_vars.size());
    n_odd_ = static_cast<int>(odd_vars.size());
    if (n_odd_ > 62) throw Error("chart '" + name_ + "': too many odd variables");
    names_ = std::move(even_vars);
    names_.insert(names_.end(), odd_vars.begin(), odd_vars.end());
    names_.insert(names_.end(), params.begin(), params.end());
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw Error("chart '" + name_ + "': empty variable name");
        if (!seen.insert(n).second)
            throw Error("chart '" + name_ + "': duplicate variable name '" + n + "'");
    }
}

VarId Chart::find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<VarId>(i);
    return -1;
}

VarId Chart::require(const std::string& name) const {
    VarId v = find(name);
    if (v < 0) throw Error("chart '" + name_ + "': unknown variable '" + name + "'");
    return v;
}

std::vector<VarId> Chart::coords() const {
    std::vector<VarId> out;
    for (VarId v = 0; v < n_even_ + n_odd_; ++v) out.push_back(v);
    return out;
}

std::vector<VarId> Chart::even_coords() const {
    std::vector<VarId> out;
    for (VarId v = 0; v < n_even_; ++v) out.push_back(v);
    return out;
}

std::vector<VarId> Chart::odd_coords() const {
    std::vector<VarId> out;
    for (VarId v = n_even_; v < n_even_ + n_odd_; ++v) out.push_back(v);
    return out;
}

ChartPtr make_chart(std::string name, std::vector<std::string> even_vars,
                    std::vector<std::string> odd_vars, std::vector<std::string> params) {
    return std::make_shared<Chart>(std::move(name), std::move(even_vars), std::move(odd_vars),
                                   std::move(params));
}

ChartPtr unify_charts(const ChartPtr& a, const ChartPtr& b) {
    if (!a) return b;
    if (!b) return a;
    if (a.get() != b.get())
        throw ChartMismatch("operands live on different charts: '" + a->name() + "' vs '" +
                            b->name() + "'");
    return a;
}

}  // namespace densops
