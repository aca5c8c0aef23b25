#ifndef FAIRGDA_TRACE_IO_HPP
#define FAIRGDA_TRACE_IO_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fairgda/errors.hpp"
#include "fairgda/optimizers.hpp"

namespace fairgda {

inline constexpr const char* kTraceHeader =
    "t,L_C,L_F,acc,fairness,identity_residual,grad_norm_F,grad_norm_C,alpha";

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// One row per iteration, fixed column order. An undefined fairness value
// (FDR conditioned on an empty event) is written as "nan".
inline void save_trace(const TrainingTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("save_trace: cannot write '" + path + "'");
    out << kTraceHeader << "\n";
    for (const auto& r : trace) {
        out << r.t << ',' << detail::fmt_double(r.loss_c) << ','
            << detail::fmt_double(r.loss_f) << ',' << detail::fmt_double(r.accuracy)
            << ',' << (r.fairness ? detail::fmt_double(*r.fairness) : "nan") << ','
            << detail::fmt_double(r.identity_residual) << ','
            << detail::fmt_double(r.grad_norm_f) << ','
            << detail::fmt_double(r.grad_norm_c) << ','
            << detail::fmt_double(r.alpha) << "\n";
    }
}

inline TrainingTrace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("load_trace: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw data_error("load_trace: bad header in '" + path + "'");
    }
    TrainingTrace trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        TraceRow r;
        auto next = [&]() -> std::string {
            if (!std::getline(ss, cell, ',')) {
                throw data_error("load_trace: short row in '" + path + "'");
            }
            return cell;
        };
        r.t = std::stoi(next());
        r.loss_c = std::stod(next());
        r.loss_f = std::stod(next());
        r.accuracy = std::stod(next());
        const double fair = std::stod(next());
        r.fairness = std::isnan(fair) ? std::nullopt : std::optional<double>(fair);
        r.identity_residual = std::stod(next());
        r.grad_norm_f = std::stod(next());
        r.grad_norm_c = std::stod(next());
        r.alpha = std::stod(next());
        trace.push_back(r);
    }
    return trace;
}

}  // namespace fairgda

#endif
