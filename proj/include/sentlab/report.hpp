#pragma once

#include <span>
#include <string>

#include "sentlab/eval.hpp"

namespace sentlab::eval {

enum class ReportFormat { csv, svg };

// CSV: fixed header "dataset,encoder,decoder,spec,similarity,pearson,
// spearman,accuracy,seed", metrics to 6 decimals, empty cells for metrics
// a row does not carry.
// SVG: a line chart of metric vs unroll count for sweep rows (one polyline
// per space/metric series; the n=0 encoder row becomes a dashed baseline).
void emit_report(std::span<const EvalReport> reports, ReportFormat format,
                 const std::string& path);

std::string render_report_csv(std::span<const EvalReport> reports);
std::string render_report_svg(std::span<const EvalReport> reports);

}  // namespace sentlab::eval
