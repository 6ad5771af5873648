#include "gifs/render.hpp"

#include "gifs/affine.hpp"
#include "gifs/codespace.hpp"
#include "gifs/deterministic.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gifs::render {

using nlohmann::json;

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::deterministic: return "deterministic";
        case Algorithm::deterministic_simplified: return "deterministic-simplified";
        case Algorithm::chaos: return "chaos";
        case Algorithm::affine_shortcut: return "affine-shortcut";
        case Algorithm::affine_full: return "affine-full";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "deterministic") return Algorithm::deterministic;
    if (name == "deterministic-simplified") return Algorithm::deterministic_simplified;
    if (name == "chaos") return Algorithm::chaos;
    if (name == "affine-shortcut") return Algorithm::affine_shortcut;
    if (name == "affine-full") return Algorithm::affine_full;
    throw config_error("unknown algorithm '" + name +
                       "' (expected deterministic, deterministic-simplified, chaos, "
                       "affine-shortcut or affine-full)");
}

void Viewport::validate() const {
    if (!(x1 > x0) || !(y1 > y0)) throw config_error("viewport: extent must be positive in both axes");
}

BudgetOptions::BudgetOptions()
    : addresses(kDefaultAddressBudget), table_entries(kDefaultTableBudget), work(kDefaultWorkBudget) {}

BudgetOptions BudgetOptions::from_env() {
    BudgetOptions b;
    if (const char* env = std::getenv("GIFS_BUDGET")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0' || v == 0) throw config_error("GIFS_BUDGET: expected a positive integer");
        b.addresses = v;
        b.table_entries = v;
    }
    return b;
}

namespace {

double number_field(const json& j, const std::string& where) {
    if (!j.is_number()) throw config_error(where + ": expected a number");
    return j.get<double>();
}

Matrixd parse_matrix(const json& j, int d, const std::string& where) {
    Matrixd a(d, d);
    if (!j.is_array()) throw config_error(where + ": expected an array");
    if (j.size() == static_cast<std::size_t>(d * d)) {
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) a(r, c) = number_field(j[r * d + c], where);
        return a;
    }
    // nested rows are accepted as well
    if (j.size() == static_cast<std::size_t>(d)) {
        for (int r = 0; r < d; ++r) {
            const json& row = j[r];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(d))
                throw config_error(where + ": expected " + std::to_string(d) + " entries per row");
            for (int c = 0; c < d; ++c) a(r, c) = number_field(row[c], where);
        }
        return a;
    }
    throw config_error(where + ": expected " + std::to_string(d * d) + " row-major entries");
}

}  // namespace

RenderConfig parse_config(const std::string& text, bool strict) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw config_error("config: expected a JSON object");

    RenderConfig cfg;
    if (!j.contains("dimension")) throw config_error("dimension: missing");
    if (!j.contains("order")) throw config_error("order: missing");
    cfg.system.dim = j["dimension"].get<int>();
    cfg.system.order = j["order"].get<int>();
    if (cfg.system.dim < 1) throw config_error("dimension: must be >= 1");
    if (cfg.system.order < 1) throw config_error("order: must be >= 1");

    if (!j.contains("maps") || !j["maps"].is_array() || j["maps"].empty())
        throw config_error("maps: need a nonempty list of maps");
    const int d = cfg.system.dim;
    const int m = cfg.system.order;
    int index = 0;
    for (const json& jm : j["maps"]) {
        const std::string where = "maps[" + std::to_string(index) + "]";
        if (!jm.is_object()) throw config_error(where + ": expected an object");
        if (!jm.contains("matrices") || !jm["matrices"].is_array() ||
            jm["matrices"].size() != static_cast<std::size_t>(m))
            throw config_error(where + ".matrices: expected " + std::to_string(m) + " matrices");
        AffineMap<double> a;
        for (int t = 0; t < m; ++t)
            a.coeffs.push_back(parse_matrix(jm["matrices"][t], d, where + ".matrices[" + std::to_string(t) + "]"));
        if (!jm.contains("translation") || !jm["translation"].is_array() ||
            jm["translation"].size() != static_cast<std::size_t>(d))
            throw config_error(where + ".translation: expected " + std::to_string(d) + " numbers");
        a.offset.resize(d);
        for (int t = 0; t < d; ++t) a.offset[t] = number_field(jm["translation"][t], where + ".translation");
        cfg.system.maps.push_back(GifsMap<double>::affine(std::move(a)));
        ++index;
    }

    if (j.contains("probabilities")) {
        const json& jp = j["probabilities"];
        if (!jp.is_array() || jp.size() != cfg.system.maps.size())
            throw config_error("probabilities: need one entry per map");
        for (const json& p : jp) cfg.system.probabilities.push_back(number_field(p, "probabilities"));
    }
    try {
        cfg.system.validate();
    } catch (const config_error& e) {
        throw config_error(std::string(e.what()));
    }

    if (j.contains("render")) {
        const json& jr = j["render"];
        if (!jr.is_object()) throw config_error("render: expected an object");
        if (jr.contains("algorithm")) cfg.algorithm = algorithm_from_string(jr["algorithm"].get<std::string>());
        if (jr.contains("depth")) cfg.depth = jr["depth"].get<int>();
        if (jr.contains("points")) cfg.points = jr["points"].get<std::int64_t>();
        if (jr.contains("burn_in")) cfg.burn_in = jr["burn_in"].get<std::int64_t>();
        if (jr.contains("seed")) cfg.seed = jr["seed"].get<std::uint64_t>();
        if (jr.contains("width")) cfg.width = jr["width"].get<int>();
        if (jr.contains("height")) cfg.height = jr["height"].get<int>();
        if (jr.contains("viewport")) {
            const json& v = jr["viewport"];
            if (!v.is_array() || v.size() != 4) throw config_error("render.viewport: expected [x0, x1, y0, y1]");
            Viewport vp{number_field(v[0], "render.viewport"), number_field(v[1], "render.viewport"),
                        number_field(v[2], "render.viewport"), number_field(v[3], "render.viewport")};
            vp.validate();
            cfg.viewport = vp;
        }
        if (jr.contains("decimation")) {
            const double r = number_field(jr["decimation"], "render.decimation");
            if (!(r > 0)) throw config_error("render.decimation: must be positive");
            cfg.decimation = r;
        }
        if (jr.contains("output")) cfg.output = jr["output"].get<std::string>();
        if (jr.contains("mode")) {
            const std::string mode = jr["mode"].get<std::string>();
            if (mode == "binary")
                cfg.binary = true;
            else if (mode == "density")
                cfg.binary = false;
            else
                throw config_error("render.mode: expected 'density' or 'binary'");
        }
        if (cfg.depth < 1) throw config_error("render.depth: must be >= 1");
        if (cfg.points < 1) throw config_error("render.points: must be >= 1");
        if (cfg.width < 1 || cfg.height < 1) throw config_error("render.width/height: must be >= 1");
    }

    if (strict) {
        const auto report = validate_contractive(cfg.system);
        if (!report.pass)
            throw config_error("contractivity: bound " + std::to_string(report.max_bound) +
                               " >= 1 (strict mode)");
    }
    return cfg;
}

RenderConfig load_config(const std::string& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), strict);
}

std::string serialize_config(const RenderConfig& cfg) {
    json j;
    j["dimension"] = cfg.system.dim;
    j["order"] = cfg.system.order;
    json maps = json::array();
    for (const auto& f : cfg.system.maps) {
        if (!f.is_affine())
            throw config_error("serialize_config: only affine systems have a file form");
        const AffineMap<double>& a = f.affine_part();
        json jm;
        json mats = json::array();
        for (const auto& A : a.coeffs) {
            json flat = json::array();
            for (int r = 0; r < a.dim(); ++r)
                for (int c = 0; c < a.dim(); ++c) flat.push_back(A(r, c));
            mats.push_back(std::move(flat));
        }
        jm["matrices"] = std::move(mats);
        json tr = json::array();
        for (int t = 0; t < a.dim(); ++t) tr.push_back(a.offset[t]);
        jm["translation"] = std::move(tr);
        maps.push_back(std::move(jm));
    }
    j["maps"] = std::move(maps);
    if (!cfg.system.probabilities.empty()) j["probabilities"] = cfg.system.probabilities;

    json jr;
    jr["algorithm"] = to_string(cfg.algorithm);
    jr["depth"] = cfg.depth;
    jr["points"] = cfg.points;
    if (cfg.burn_in >= 0) jr["burn_in"] = cfg.burn_in;
    jr["seed"] = cfg.seed;
    jr["width"] = cfg.width;
    jr["height"] = cfg.height;
    if (cfg.viewport)
        jr["viewport"] = {cfg.viewport->x0, cfg.viewport->x1, cfg.viewport->y0, cfg.viewport->y1};
    if (cfg.decimation) jr["decimation"] = *cfg.decimation;
    if (!cfg.output.empty()) jr["output"] = cfg.output;
    if (cfg.binary) jr["mode"] = "binary";
    j["render"] = std::move(jr);
    return j.dump(2) + "\n";
}

}  // namespace gifs::render
