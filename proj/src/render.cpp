#include "gifs/render.hpp"

#include "gifs/affine.hpp"
#include "gifs/chaosgame.hpp"
#include "gifs/deterministic.hpp"
#include "gifs/hausdorff.hpp"

#include <algorithm>
#include <cmath>

namespace gifs::render {

Box bounding_box(const PointCloud<double>& cloud) {
    if (cloud.empty()) throw config_error("bounding_box: empty cloud");
    const int d = cloud.dim();
    Box box;
    box.lo = cloud[0];
    box.hi = cloud[0];
    for (const auto& p : cloud)
        for (int t = 0; t < d; ++t) {
            box.lo[t] = std::min(box.lo[t], p[t]);
            box.hi[t] = std::max(box.hi[t], p[t]);
        }
    return box;
}

Box auto_viewport(const PointCloud<double>& cloud, double margin_fraction) {
    Box box = bounding_box(cloud);
    const int d = cloud.dim();
    for (int t = 0; t < d; ++t) {
        double extent = box.hi[t] - box.lo[t];
        if (extent == 0) {
            // degenerate axis: give it unit extent around the value
            box.lo[t] -= 0.5;
            box.hi[t] += 0.5;
            extent = 1.0;
        }
        box.lo[t] -= margin_fraction * extent;
        box.hi[t] += margin_fraction * extent;
    }
    return box;
}

Viewport to_viewport(const Box& box) {
    if (box.lo.size() != 2) throw config_error("to_viewport: box is not two-dimensional");
    Viewport vp{box.lo[0], box.hi[0], box.lo[1], box.hi[1]};
    vp.validate();
    return vp;
}

RasterImage rasterize(const PointCloud<double>& cloud, const Viewport& vp, int width, int height,
                      bool binary, RasterStats* stats) {
    vp.validate();
    if (width < 1 || height < 1) throw config_error("rasterize: image size must be >= 1x1");
    if (cloud.dim() != 2) throw config_error("rasterize: requires dimension 2");

    const double dx = (vp.x1 - vp.x0) / width;
    const double dy = (vp.y1 - vp.y0) / height;
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(width) * height, 0);
    RasterStats local;
    for (const auto& p : cloud) {
        const double x = p[0], y = p[1];
        if (x < vp.x0 || x > vp.x1 || y < vp.y0 || y > vp.y1) {
            ++local.outside;
            continue;
        }
        int px = static_cast<int>(std::floor((x - vp.x0) / dx));
        int py = static_cast<int>(std::floor((vp.y1 - y) / dy));
        px = std::clamp(px, 0, width - 1);   // max-edge points land inward
        py = std::clamp(py, 0, height - 1);
        ++counts[static_cast<std::size_t>(py) * width + px];
        ++local.inside;
    }
    if (stats) *stats = local;

    RasterImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(counts.size(), 0);
    if (binary) {
        for (std::size_t i = 0; i < counts.size(); ++i) img.pixels[i] = counts[i] ? 255 : 0;
        return img;
    }
    const std::uint32_t cmax = *std::max_element(counts.begin(), counts.end());
    if (cmax == 0) return img;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!counts[i]) continue;
        const double v = std::sqrt(static_cast<double>(counts[i]) / cmax);  // gamma 0.5
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
    return img;
}

CompareReport compare_runs(const PointCloud<double>& a, const PointCloud<double>& b) {
    if (a.dim() != b.dim()) throw config_error("compare_runs: dimension mismatch");
    CompareReport r;
    r.hausdorff = hausdorff_distance(a, b);
    r.card_a = a.size();
    r.card_b = b.size();
    r.box_a = bounding_box(a);
    r.box_b = bounding_box(b);
    return r;
}

PointCloud<double> run_algorithm(const RenderConfig& cfg, const BudgetOptions& budgets) {
    const GifsSystem<double>& G = cfg.system;
    G.validate();
    switch (cfg.algorithm) {
        case Algorithm::deterministic:
            return det_run(G, default_seeds(G), cfg.depth, cfg.decimation, budgets.work);
        case Algorithm::deterministic_simplified:
            return det_run_simplified(G, PointCloud<double>::singleton(fixed_point(G, 0)), cfg.depth,
                                      cfg.decimation, budgets.work);
        case Algorithm::chaos:
            return chaos_run(G, std::optional<Vectord>{}, static_cast<std::uint64_t>(cfg.points),
                             cfg.burn_in, RngSpec{cfg.seed});
        case Algorithm::affine_shortcut:
            return attractor_shortcut(G, cfg.depth, budgets.table_entries, cfg.decimation, budgets.work);
        case Algorithm::affine_full: {
            const auto tables = build_tables_full(G, cfg.depth, budgets.table_entries);
            PointCloud<double> cloud(G.dim);
            for (const auto& b : tables.B[cfg.depth]) cloud.insert(b);
            return cloud;
        }
    }
    throw config_error("run_algorithm: unknown algorithm");
}

}  // namespace gifs::render
