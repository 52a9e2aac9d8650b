#pragma once

#include <string>

#include "densops/expr.hpp"

namespace densops {

// Parses arithmetic over the chart's variables: + - * / ^ ( ), integer
// literals, exp/log/sqrt, rational exponents like x^(1/2).
Expr parse_expr(const std::string& text, const ChartPtr& chart);

// Canonical printing; output parses back to an equal expression.
std::string to_string(const Poly& p, const ChartPtr& chart);
std::string to_string(const RatFunc& f, const ChartPtr& chart);
std::string to_string(const Expr& e);

}  // namespace densops
