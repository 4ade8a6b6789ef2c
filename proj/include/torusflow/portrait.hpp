#pragma once

#include <string>

#include "torusflow/field.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/singularity.hpp"
#include "torusflow/text.hpp"

namespace torusflow {

struct PortraitOptions {
    int size_px = 640;
    int margin_px = 24;
    ZeroSearch search;
    /// Background contours of u on the standard lift (marching squares).
    bool background_levels = true;
    double background_spacing = 0.3;
    int background_grid = 128;
    /// The two dashed level curves crossing the strip.
    double level_lo = 1.0;
    double level_hi = 5.0;
    SeparatrixOptions separatrix;
    LevelCurveOptions level_curve;
};

/// Phase portrait of the analytic family on the fundamental square [0, 2π]^2 (y up).
/// Stroke classes:
///   sep-s1      separatrices of the leftmost saddle s1
///   sep-s23     separatrices of s2 and s3
///   level-mark  dashed curves u = level_lo and u = level_hi crossing the strip
///   level-bg    background contours of u
///   zero        markers for zeros (data-kind = saddle | minimum | maximum)
/// Output depends only on (p, options, settings) and is byte-for-byte reproducible.
std::string render_portrait_svg(const FieldParams& p, const PortraitOptions& options = {},
                                const Settings& header_settings = {});

}  // namespace torusflow
