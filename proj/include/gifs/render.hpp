#pragma once

#include "gifs/system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gifs::render {

enum class Algorithm {
    deterministic,
    deterministic_simplified,
    chaos,
    affine_shortcut,
    affine_full,
};

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

/// Axis-aligned 2D render window.
struct Viewport {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    void validate() const;
};

/// Axis-aligned box in arbitrary dimension.
struct Box {
    Vectord lo, hi;
};

/// Enumeration/table/work budgets, overridable through GIFS_BUDGET.
struct BudgetOptions {
    std::uint64_t addresses;
    std::uint64_t table_entries;
    std::uint64_t work;
    BudgetOptions();
    static BudgetOptions from_env();
};

struct RenderConfig {
    GifsSystem<double> system;
    Algorithm algorithm = Algorithm::deterministic_simplified;
    int depth = 8;                    // deterministic iterations / affine level
    std::int64_t points = 100000;     // chaos sample count
    std::int64_t burn_in = -1;        // -1: default rule (0 from a fixed point)
    std::uint64_t seed = 0;
    int width = 512, height = 512;
    std::optional<Viewport> viewport;
    std::optional<double> decimation;
    std::string output;
    bool binary = false;              // density rendering unless set
};

/// Parses the structured-text system definition. With strict set, a system
/// whose contraction bound reaches 1 is rejected instead of warned about.
RenderConfig parse_config(const std::string& text, bool strict = false);
RenderConfig load_config(const std::string& path, bool strict = false);
std::string serialize_config(const RenderConfig& cfg);

Box bounding_box(const PointCloud<double>& cloud);

/// Bounding box expanded by margin_fraction per side; degenerate axes get
/// unit extent before the margin is applied.
Box auto_viewport(const PointCloud<double>& cloud, double margin_fraction);
Viewport to_viewport(const Box& box);

struct RasterImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, top row first
};

struct RasterStats {
    std::size_t inside = 0, outside = 0;
};

RasterImage rasterize(const PointCloud<double>& cloud, const Viewport& vp, int width, int height,
                      bool binary = false, RasterStats* stats = nullptr);

/// Binary portable graymap, bit-exact: "P5\n<w> <h>\n255\n" + raw rows.
void write_image(const RasterImage& img, const std::string& path);
RasterImage read_pgm(const std::string& path);

struct CompareReport {
    double hausdorff = 0;
    std::size_t card_a = 0, card_b = 0;
    Box box_a, box_b;
};

CompareReport compare_runs(const PointCloud<double>& a, const PointCloud<double>& b);

/// Dispatches one algorithm run described by the config.
PointCloud<double> run_algorithm(const RenderConfig& cfg, const BudgetOptions& budgets);

}  // namespace gifs::render
