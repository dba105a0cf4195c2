#include "ccopt/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ccopt/field_io.hpp"

namespace ccopt {

namespace {

struct Block {
    std::map<std::string, std::vector<std::string>> entries;
    std::vector<std::string> seen_order;
};

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// line grammar:  block { \n  key = v1 v2 ... \n }  with '#' comments
std::map<std::string, Block> tokenize(const std::string& text) {
    std::map<std::string, Block> blocks;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        if (current.empty()) {
            if (line.size() < 2 || line.back() != '{')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'name {'");
            std::string name = strip(line.substr(0, line.size() - 1));
            if (name.empty() || blocks.count(name))
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": bad or duplicate block name");
            current = name;
            blocks[current] = {};
        } else if (line == "}") {
            current.clear();
        } else {
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
            std::string key = strip(line.substr(0, eq));
            std::string rest = strip(line.substr(eq + 1));
            if (key.empty() || rest.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty key or value");
            Block& b = blocks[current];
            if (b.entries.count(key))
                throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                                  key + "' in block '" + current + "'");
            std::istringstream vs(rest);
            std::vector<std::string> vals;
            std::string tok;
            while (vs >> tok) vals.push_back(tok);
            b.entries[key] = vals;
            b.seen_order.push_back(key);
        }
    }
    if (!current.empty()) throw ConfigError("config: unterminated block '" + current + "'");
    return blocks;
}

// typed readers that consume keys so leftovers can be rejected
class BlockReader {
  public:
    BlockReader(Block& block, std::string name) : block_(block), name_(std::move(name)) {}

    bool has(const std::string& key) const { return block_.entries.count(key) != 0; }

    std::vector<std::string> take(const std::string& key) {
        auto it = block_.entries.find(key);
        if (it == block_.entries.end())
            throw ConfigError("config: block '" + name_ + "' is missing key '" + key + "'");
        auto vals = it->second;
        block_.entries.erase(it);
        return vals;
    }

    std::string take_word(const std::string& key) {
        auto vals = take(key);
        if (vals.size() != 1)
            throw ConfigError("config: key '" + key + "' in block '" + name_ +
                              "' expects a single value");
        return vals[0];
    }

    double take_double(const std::string& key) { return parse_double(take_word(key), key); }

    int take_int(const std::string& key) {
        const std::string w = take_word(key);
        try {
            std::size_t pos = 0;
            int v = std::stoi(w, &pos);
            if (pos != w.size()) throw std::invalid_argument(w);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' expects an integer, got '" + w + "'");
        }
    }

    bool take_bool(const std::string& key) {
        const std::string w = take_word(key);
        if (w == "true" || w == "yes" || w == "1") return true;
        if (w == "false" || w == "no" || w == "0") return false;
        throw ConfigError("config: key '" + key + "' expects a boolean, got '" + w + "'");
    }

    std::vector<double> take_doubles(const std::string& key, int count) {
        auto vals = take(key);
        if (static_cast<int>(vals.size()) != count)
            throw ConfigError("config: key '" + key + "' expects " + std::to_string(count) +
                              " values");
        std::vector<double> out;
        out.reserve(vals.size());
        for (const auto& v : vals) out.push_back(parse_double(v, key));
        return out;
    }

    std::vector<int> take_ints(const std::string& key, int count) {
        auto vals = take(key);
        if (static_cast<int>(vals.size()) != count)
            throw ConfigError("config: key '" + key + "' expects " + std::to_string(count) +
                              " values");
        std::vector<int> out;
        for (const auto& v : vals) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stoi(v, &pos));
                if (pos != v.size()) throw std::invalid_argument(v);
            } catch (const std::exception&) {
                throw ConfigError("config: key '" + key + "' expects integers");
            }
        }
        return out;
    }

    void reject_leftovers() const {
        if (!block_.entries.empty())
            throw ConfigError("config: unknown key '" + block_.entries.begin()->first +
                              "' in block '" + name_ + "'");
    }

  private:
    static double parse_double(const std::string& w, const std::string& key) {
        try {
            std::size_t pos = 0;
            double v = std::stod(w, &pos);
            if (pos != w.size()) throw std::invalid_argument(w);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' expects a number, got '" + w + "'");
        }
    }

    Block& block_;
    std::string name_;
};

FieldSpec parse_field_spec(BlockReader& r, const std::string& key) {
    auto vals = r.take(key);
    FieldSpec spec;
    if (vals.empty()) throw ConfigError("config: empty field spec for '" + key + "'");
    const std::string& kind = vals[0];
    auto want = [&](std::size_t n) {
        if (vals.size() != n)
            throw ConfigError("config: field spec '" + key + "' (" + kind + ") expects " +
                              std::to_string(n - 1) + " parameter(s)");
    };
    if (kind == "constant") {
        want(2);
        spec.kind = FieldSpec::Kind::constant;
        spec.value = std::stod(vals[1]);
    } else if (kind == "gaussian") {
        want(4);
        spec.kind = FieldSpec::Kind::gaussian;
        spec.value = std::stod(vals[1]);
        spec.amplitude = std::stod(vals[2]);
        spec.width = std::stod(vals[3]);
        if (!(spec.width > 0.0))
            throw ConfigError("config: gaussian width must be > 0 for '" + key + "'");
    } else if (kind == "file") {
        want(2);
        spec.kind = FieldSpec::Kind::file;
        spec.path = vals[1];
    } else {
        throw ConfigError("config: unknown field spec kind '" + kind + "' for '" + key + "'");
    }
    return spec;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    auto blocks = tokenize(text);
    RunConfig cfg;

    auto take_block = [&](const char* name) -> Block* {
        auto it = blocks.find(name);
        if (it == blocks.end()) return nullptr;
        return &it->second;
    };

    {
        Block* b = take_block("grid");
        if (!b) throw ConfigError("config: missing required block 'grid'");
        BlockReader r(*b, "grid");
        cfg.grid.dim = r.take_int("dim");
        if (cfg.grid.dim < 1 || cfg.grid.dim > 3)
            throw ConfigError("config: grid dim must be 1, 2 or 3");
        cfg.grid.cells = r.take_ints("cells", cfg.grid.dim);
        cfg.grid.extent = r.take_doubles("extent", cfg.grid.dim);
        r.reject_leftovers();
        blocks.erase("grid");
    }
    {
        Block* b = take_block("time");
        if (!b) throw ConfigError("config: missing required block 'time'");
        BlockReader r(*b, "time");
        cfg.time.T = r.take_double("T");
        cfg.time.steps = r.take_int("steps");
        r.reject_leftovers();
        blocks.erase("time");
    }
    if (Block* b = take_block("model")) {
        BlockReader r(*b, "model");
        if (r.has("s")) cfg.model.s = r.take_double("s");
        if (r.has("alpha")) cfg.model.alpha = r.take_double("alpha");
        if (r.has("q")) cfg.model.q = r.take_double("q");
        r.reject_leftovers();
        blocks.erase("model");
    }
    {
        Block* b = take_block("init");
        if (!b) throw ConfigError("config: missing required block 'init'");
        BlockReader r(*b, "init");
        cfg.u0 = parse_field_spec(r, "u0");
        cfg.v0 = parse_field_spec(r, "v0");
        r.reject_leftovers();
        blocks.erase("init");
    }
    if (Block* b = take_block("control")) {
        BlockReader r(*b, "control");
        if (r.has("mask_lo") != r.has("mask_hi"))
            throw ConfigError("config: control mask needs both mask_lo and mask_hi");
        if (r.has("mask_lo")) {
            cfg.control.mask_lo = r.take_doubles("mask_lo", cfg.grid.dim);
            cfg.control.mask_hi = r.take_doubles("mask_hi", cfg.grid.dim);
        }
        if (r.has("constraint")) {
            const std::string kind = r.take_word("constraint");
            if (kind == "none") {
                cfg.control.constraints.kind = ControlConstraints::Kind::unconstrained;
            } else if (kind == "box") {
                cfg.control.constraints.kind = ControlConstraints::Kind::box;
                cfg.control.constraints.f_min = r.take_double("f_min");
                cfg.control.constraints.f_max = r.take_double("f_max");
            } else {
                throw ConfigError("config: constraint must be 'none' or 'box'");
            }
        }
        if (r.has("initial")) {
            const std::string kind = r.take_word("initial");
            if (kind == "zero") {
                cfg.control.initial = ControlConfig::Initial::zero;
            } else if (kind == "constant") {
                cfg.control.initial = ControlConfig::Initial::constant;
                cfg.control.initial_value = r.take_double("initial_value");
            } else if (kind == "file") {
                cfg.control.initial = ControlConfig::Initial::file;
                cfg.control.initial_file = r.take_word("initial_file");
            } else {
                throw ConfigError("config: control initial must be zero, constant or file");
            }
        }
        r.reject_leftovers();
        blocks.erase("control");
    }
    if (Block* b = take_block("cost")) {
        CostConfig cc;
        BlockReader r(*b, "cost");
        cc.gamma_u = r.take_double("gamma_u");
        if (r.has("gamma_v")) cc.gamma_v = r.take_double("gamma_v");
        if (r.has("gamma_f")) cc.gamma_f = r.take_double("gamma_f");
        const std::string desired = r.take_word("desired");
        if (desired == "generate") {
            cc.desired = CostConfig::Desired::generate;
            const std::string kind = r.take_word("fstar");
            if (kind == "zero") {
                cc.fstar = ControlConfig::Initial::zero;
            } else if (kind == "constant") {
                cc.fstar = ControlConfig::Initial::constant;
                cc.fstar_value = r.take_double("fstar_value");
            } else if (kind == "file") {
                cc.fstar = ControlConfig::Initial::file;
                cc.fstar_file = r.take_word("fstar_file");
            } else {
                throw ConfigError("config: fstar must be zero, constant or file");
            }
        } else if (desired == "files") {
            cc.desired = CostConfig::Desired::files;
            cc.u_d_pattern = r.take_word("u_d_pattern");
            cc.v_d_pattern = r.take_word("v_d_pattern");
        } else {
            throw ConfigError("config: desired must be 'generate' or 'files'");
        }
        r.reject_leftovers();
        cfg.cost = cc;
        blocks.erase("cost");
    }
    if (Block* b = take_block("optimize")) {
        BlockReader r(*b, "optimize");
        if (r.has("max_iters")) cfg.optimize.max_iters = r.take_int("max_iters");
        if (r.has("armijo_c")) cfg.optimize.armijo_c = r.take_double("armijo_c");
        if (r.has("backtrack_factor"))
            cfg.optimize.backtrack_factor = r.take_double("backtrack_factor");
        if (r.has("initial_step")) cfg.optimize.initial_step = r.take_double("initial_step");
        if (r.has("grad_tol")) cfg.optimize.grad_tol = r.take_double("grad_tol");
        if (r.has("min_step")) cfg.optimize.min_step = r.take_double("min_step");
        r.reject_leftovers();
        blocks.erase("optimize");
    }
    if (Block* b = take_block("gradcheck")) {
        BlockReader r(*b, "gradcheck");
        if (r.has("eps")) cfg.gradcheck.eps = r.take_double("eps");
        if (r.has("directions")) cfg.gradcheck.directions = r.take_int("directions");
        if (r.has("transpose_trials"))
            cfg.gradcheck.transpose_trials = r.take_int("transpose_trials");
        if (r.has("seed")) cfg.gradcheck.seed = static_cast<unsigned>(r.take_int("seed"));
        r.reject_leftovers();
        blocks.erase("gradcheck");
    }
    if (Block* b = take_block("output")) {
        BlockReader r(*b, "output");
        if (r.has("dir")) cfg.output.dir = r.take_word("dir");
        if (r.has("dump_fields")) cfg.output.dump_fields = r.take_bool("dump_fields");
        r.reject_leftovers();
        blocks.erase("output");
    }
    if (!blocks.empty())
        throw ConfigError("config: unknown block '" + blocks.begin()->first + "'");

    // re-validate type invariants at parse time
    validate(cfg.model);
    TimeGrid tg{cfg.time.T, cfg.time.steps};
    validate(tg);
    validate(cfg.control.constraints);
    validate(cfg.optimize);
    if (!(cfg.gradcheck.eps > 0.0)) throw ConfigError("config: gradcheck eps must be > 0");
    if (cfg.gradcheck.directions < 1 || cfg.gradcheck.transpose_trials < 1)
        throw ConfigError("config: gradcheck counts must be >= 1");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

Grid build_grid(const RunConfig& cfg) {
    return make_grid(cfg.grid.dim, cfg.grid.cells, cfg.grid.extent);
}

ScalarField build_field(const FieldSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case FieldSpec::Kind::constant:
            return ScalarField(grid, spec.value);
        case FieldSpec::Kind::gaussian: {
            ScalarField w(grid, 0.0);
            std::int64_t idx = 0;
            for (int i2 = 0; i2 < grid.cells[2]; ++i2)
                for (int i1 = 0; i1 < grid.cells[1]; ++i1)
                    for (int i0 = 0; i0 < grid.cells[0]; ++i0, ++idx) {
                        const int ii[3] = {i0, i1, i2};
                        double r2 = 0.0;
                        for (int k = 0; k < grid.dim; ++k) {
                            const double c = (ii[k] + 0.5) * grid.spacing[k];
                            const double d = c - 0.5 * grid.extent[k];
                            r2 += d * d;
                        }
                        w[idx] = spec.value +
                                 spec.amplitude * std::exp(-r2 / (2.0 * spec.width * spec.width));
                    }
            return w;
        }
        case FieldSpec::Kind::file:
            return read_field_on_grid(spec.path, grid);
    }
    throw ConfigError("build_field: unreachable field kind");
}

SubdomainMask build_mask(const RunConfig& cfg, const Grid& grid) {
    if (cfg.control.mask_lo.empty()) {
        SubdomainMask m;
        m.grid = grid;
        m.indicator.assign(static_cast<std::size_t>(grid.total), 1.0);
        return m;
    }
    return make_box_mask(grid, cfg.control.mask_lo, cfg.control.mask_hi);
}

ControlField build_initial_control(const RunConfig& cfg, const Grid& grid,
                                   const SubdomainMask& mask) {
    TimeGrid tg{cfg.time.T, cfg.time.steps};
    switch (cfg.control.initial) {
        case ControlConfig::Initial::zero:
            return make_control(tg, mask, 0.0);
        case ControlConfig::Initial::constant:
            return make_control(tg, mask, cfg.control.initial_value);
        case ControlConfig::Initial::file: {
            ScalarField base = read_field_on_grid(cfg.control.initial_file, grid);
            ControlField f;
            f.time_grid = tg;
            f.mask = mask;
            f.f_series.assign(static_cast<std::size_t>(tg.steps) + 1, base);
            apply_mask(f);
            return f;
        }
    }
    throw ConfigError("build_initial_control: unreachable kind");
}

namespace {

nlohmann::ordered_json field_spec_echo(const FieldSpec& s) {
    nlohmann::ordered_json j;
    switch (s.kind) {
        case FieldSpec::Kind::constant:
            j["kind"] = "constant";
            j["value"] = s.value;
            break;
        case FieldSpec::Kind::gaussian:
            j["kind"] = "gaussian";
            j["base"] = s.value;
            j["amplitude"] = s.amplitude;
            j["width"] = s.width;
            break;
        case FieldSpec::Kind::file:
            j["kind"] = "file";
            j["path"] = s.path;
            break;
    }
    return j;
}

}  // namespace

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["grid"] = {{"dim", cfg.grid.dim}, {"cells", cfg.grid.cells}, {"extent", cfg.grid.extent}};
    j["time"] = {{"T", cfg.time.T}, {"steps", cfg.time.steps}};
    j["model"] = {{"s", cfg.model.s}, {"alpha", cfg.model.alpha}, {"q", cfg.model.q}};
    j["init"] = {{"u0", field_spec_echo(cfg.u0)}, {"v0", field_spec_echo(cfg.v0)}};

    nlohmann::ordered_json jc;
    if (cfg.control.mask_lo.empty()) {
        jc["mask"] = "whole-domain";
    } else {
        jc["mask_lo"] = cfg.control.mask_lo;
        jc["mask_hi"] = cfg.control.mask_hi;
    }
    if (cfg.control.constraints.kind == ControlConstraints::Kind::box) {
        jc["constraint"] = "box";
        jc["f_min"] = cfg.control.constraints.f_min;
        jc["f_max"] = cfg.control.constraints.f_max;
    } else {
        jc["constraint"] = "none";
    }
    switch (cfg.control.initial) {
        case ControlConfig::Initial::zero: jc["initial"] = "zero"; break;
        case ControlConfig::Initial::constant:
            jc["initial"] = "constant";
            jc["initial_value"] = cfg.control.initial_value;
            break;
        case ControlConfig::Initial::file:
            jc["initial"] = "file";
            jc["initial_file"] = cfg.control.initial_file;
            break;
    }
    j["control"] = jc;

    if (cfg.cost) {
        nlohmann::ordered_json jt;
        jt["gamma_u"] = cfg.cost->gamma_u;
        jt["gamma_v"] = cfg.cost->gamma_v;
        jt["gamma_f"] = cfg.cost->gamma_f;
        if (cfg.cost->desired == CostConfig::Desired::generate) {
            jt["desired"] = "generate";
            switch (cfg.cost->fstar) {
                case ControlConfig::Initial::zero: jt["fstar"] = "zero"; break;
                case ControlConfig::Initial::constant:
                    jt["fstar"] = "constant";
                    jt["fstar_value"] = cfg.cost->fstar_value;
                    break;
                case ControlConfig::Initial::file:
                    jt["fstar"] = "file";
                    jt["fstar_file"] = cfg.cost->fstar_file;
                    break;
            }
        } else {
            jt["desired"] = "files";
            jt["u_d_pattern"] = cfg.cost->u_d_pattern;
            jt["v_d_pattern"] = cfg.cost->v_d_pattern;
        }
        j["cost"] = jt;
    }

    j["optimize"] = {{"max_iters", cfg.optimize.max_iters},
                     {"armijo_c", cfg.optimize.armijo_c},
                     {"backtrack_factor", cfg.optimize.backtrack_factor},
                     {"initial_step", cfg.optimize.initial_step},
                     {"grad_tol", cfg.optimize.grad_tol},
                     {"min_step", cfg.optimize.min_step}};
    j["gradcheck"] = {{"eps", cfg.gradcheck.eps},
                      {"directions", cfg.gradcheck.directions},
                      {"transpose_trials", cfg.gradcheck.transpose_trials},
                      {"seed", cfg.gradcheck.seed}};
    j["output"] = {{"dir", cfg.output.dir}, {"dump_fields", cfg.output.dump_fields}};
    return j;
}

}  // namespace ccopt
