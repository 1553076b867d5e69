#include "accport/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace accport {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
    if (!out) throw ConfigError("write failed: " + p.string());
}

std::string fmt(double x, int prec) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << x;
    return os.str();
}

std::string pad(const std::string& s, std::size_t w) {
    return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

Dimension coordinate_dimension(int i) {
    if (i < 2) return Dimension::speed;
    if (i == 2) return Dimension::length;
    return Dimension::acceleration;
}

double parse_value(const std::string& text, Dimension d) {
    double value = 0.0;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), last, value);
    if (ec == std::errc() && ptr == last && std::isfinite(value)) return value;  // SI
    return parse_quantity(text, d);
}

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(' '));
    s.erase(s.find_last_not_of(' ') + 1);
    return s;
}

bool same_vhc(const VhcParams& a, const VhcParams& b) {
    auto eq = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
    return a.k == b.k && eq(a.c1, b.c1) && eq(a.c2, b.c2) && eq(a.t_cycle, b.t_cycle) &&
           eq(a.h_max, b.h_max) && eq(a.a_min, b.a_min) && eq(a.a_max, b.a_max) &&
           eq(a.w_min, b.w_min) && eq(a.w_max, b.w_max) && a.h_max_by_class == b.h_max_by_class;
}

std::string cell_params(const GridCell& c) {
    return fmt(c.v_d * 3.6, 0) + " km/h, " + fmt(c.t_h_d, 2) + " s, " + c.object_class;
}

// Rows: controller x driver parameters; columns: VHCs.
std::string verdict_table(const std::vector<CellResult>& cells, const std::vector<std::string>& vhcs,
                          const std::map<std::string, std::string>& facet_row, bool with_time) {
    std::ostringstream os;
    const std::size_t w0 = 12, w1 = 28, wc = with_time ? 22 : 12;
    os << pad("controller", w0) << pad("params", w1);
    for (const auto& v : vhcs) os << pad(v, wc);
    os << "\n";
    if (!facet_row.empty()) {
        os << pad("N_S", w0) << pad("", w1);
        for (const auto& v : vhcs) {
            auto it = facet_row.find(v);
            os << pad(it == facet_row.end() ? "-" : it->second, wc);
        }
        os << "\n";
    }
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& c : cells) {
        auto key = std::make_pair(c.controller, cell_params(c.cell));
        if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    }
    for (const auto& [ctrl, params] : rows) {
        os << pad(ctrl, w0) << pad(params, w1);
        for (const auto& v : vhcs) {
            std::string entry = "-";
            for (const auto& c : cells)
                if (c.controller == ctrl && cell_params(c.cell) == params && c.cell.vhc == v) {
                    entry = to_string(c.status) + (c.warning ? "*" : "");
                    if (with_time) entry += " (" + fmt(c.stats.wall_seconds, 2) + " s)";
                }
            os << pad(entry, wc);
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace

SliceAssignment parse_assignment(const std::string& text, int k) {
    const auto names = coordinate_names(k);
    SliceAssignment a;
    a.fixed.assign(names.size(), std::nullopt);
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("assignment '" + item + "' lacks '='");
        const std::string name = trim(item.substr(0, eq));
        const std::string value = trim(item.substr(eq + 1));
        if (name == "delay") {
            for (int i = 3; i < static_cast<int>(names.size()); ++i)
                a.fixed[i] = parse_value(value, Dimension::acceleration);
            continue;
        }
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw ConfigError("unknown coordinate '" + name + "'");
        const int i = static_cast<int>(it - names.begin());
        a.fixed[i] = parse_value(value, coordinate_dimension(i));
    }
    return a;
}

SliceOutput compute_slice(const SafeSet& s, const SliceAssignment& a) {
    if (static_cast<int>(a.fixed.size()) != s.dim())
        throw ConfigError("assignment does not match the safe set dimension");
    SliceOutput out;
    const auto names = coordinate_names(s.vhc.k);
    for (int i = 0; i < s.dim(); ++i)
        if (!a.fixed[i]) out.free_names.push_back(names[i]);
    out.poly = slice(s, a.fixed);
    out.empty = s.empty || out.poly.known_empty();
    return out;
}

std::string slice_facets_csv(const SliceOutput& s) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& n : s.free_names) os << n << ',';
    os << "b\n";
    if (s.empty) return os.str();
    for (int i = 0; i < s.poly.rows(); ++i) {
        for (int j = 0; j < s.poly.dim(); ++j) os << s.poly.A()(i, j) << ',';
        os << s.poly.b()(i) << '\n';
    }
    return os.str();
}

std::string slice_grid_csv(const SliceOutput& s, int resolution) {
    if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& n : s.free_names) os << n << ',';
    os << "inside\n";
    const int d = static_cast<int>(s.free_names.size());
    if (s.empty || d == 0) return os.str();
    const Box bb = bounding_box(s.poly);
    std::vector<int> idx(d, 0);
    Vec x(d);
    while (true) {
        for (int j = 0; j < d; ++j)
            x(j) = bb.lo(j) + (bb.hi(j) - bb.lo(j)) * idx[j] / (resolution - 1);
        for (int j = 0; j < d; ++j) os << x(j) << ',';
        os << (s.poly.contains_point(x) ? 1 : 0) << '\n';
        int j = d - 1;
        while (j >= 0 && ++idx[j] == resolution) idx[j--] = 0;
        if (j < 0) break;
    }
    return os.str();
}

int cmd_rcis(const RunConfig& cfg, const fs::path& out_dir, CommandIo io) {
    fs::create_directories(out_dir);
    struct Job {
        const VhcParams* vhc;
        std::string cls;
        SafeSet set;
        std::string error;
    };
    std::vector<Job> jobs;
    for (const auto& v : cfg.vhcs)
        for (const auto& c : cfg.grid.object_class) jobs.push_back({&v, c, {}, {}});

    const int nj = static_cast<int>(jobs.size());
    const bool outer = nj > 1;
#pragma omp parallel for schedule(dynamic) if (outer)
    for (int i = 0; i < nj; ++i) {
        Job& j = jobs[i];
        try {
            RcisOptions o;
            o.max_iter = cfg.max_iter;
            o.front = cfg.front;
            o.object_class = parse_object_class(j.cls);
            o.exec = outer ? Exec::serial : Exec::parallel;
            j.set = compute_rcis(*j.vhc, cfg.odd, o);
        } catch (const std::exception& e) {
            j.error = e.what();
        }
    }

    int code = 0;
    json summary = json::array();
    json timing = json::array();
    io.out << pad("vhc", 8) << pad("class", 12) << pad("iterations", 12) << pad("facets", 8)
           << pad("converged", 11) << pad("empty", 7) << "wall [s]\n";
    for (const auto& j : jobs) {
        const std::string file = safe_set_file_name(j.vhc->name, j.cls);
        json row = {{"vhc", j.vhc->name}, {"object_class", j.cls}};
        if (!j.error.empty()) {
            row["error"] = j.error;
            io.err << "error: " << j.vhc->name << " / " << j.cls << ": " << j.error << "\n";
            code = 2;
        } else {
            write_file(out_dir / file, safe_set_to_json_text(j.set));
            row["file"] = file;
            row["iterations_used"] = j.set.iterations_used;
            row["facet_count"] = j.set.facet_count();
            row["converged"] = j.set.converged;
            row["empty"] = j.set.empty;
            timing.push_back({{"vhc", j.vhc->name}, {"object_class", j.cls},
                              {"wall_seconds", j.set.wall_seconds}});
            io.out << pad(j.vhc->name, 8) << pad(j.cls, 12) << pad(std::to_string(j.set.iterations_used), 12)
                   << pad(std::to_string(j.set.facet_count()), 8) << pad(j.set.converged ? "yes" : "no", 11)
                   << pad(j.set.empty ? "yes" : "no", 7) << fmt(j.set.wall_seconds, 2) << "\n";
            if (j.set.empty) {
                io.err << "warning: " << j.vhc->name << " / " << j.cls << ": safe set is empty\n";
                if (code == 0) code = 1;
            } else if (!j.set.converged) {
                io.err << "warning: " << j.vhc->name << " / " << j.cls << ": no fixpoint within "
                       << cfg.max_iter << " iterations\n";
                code = 2;
            }
        }
        summary.push_back(std::move(row));
    }
    json s = {{"schema_version", kSchemaVersion}, {"kind", "rcis_summary"},
              {"front_model", to_string(cfg.front)}, {"max_iter", cfg.max_iter}, {"sets", summary}};
    write_file(out_dir / "rcis_summary.json", s.dump(1) + "\n");
    json t = {{"schema_version", kSchemaVersion}, {"kind", "rcis_timing"}, {"sets", timing}};
    write_file(out_dir / "rcis_timing.json", t.dump(1) + "\n");
    return code;
}

int cmd_check(const RunConfig& cfg, const fs::path& sets_dir, const fs::path& out_dir, CommandIo io) {
    fs::create_directories(out_dir);
    std::vector<std::string> vhc_names;
    for (const auto& v : cfg.vhcs) vhc_names.push_back(v.name);

    std::vector<SafeSet> sets;
    std::map<std::string, std::string> rejected;  // "vhc/class" -> reason
    std::map<std::string, std::string> facets;
    for (const auto& v : cfg.vhcs)
        for (const auto& c : cfg.grid.object_class) {
            const fs::path p = sets_dir / safe_set_file_name(v.name, c);
            const std::string key = v.name + "/" + c;
            if (!fs::exists(p)) {
                rejected[key] = "safe set file not found: " + p.string();
                continue;
            }
            try {
                SafeSet s = load_safe_set(p);
                VhcParams expect = v;
                expect.h_max = v.h_max_for(parse_object_class(c));
                if (s.vhc_name != v.name || s.object_class != c || !same_vhc(s.vhc, expect))
                    throw ConfigError("safe set " + p.string() + " was computed for other parameters");
                if (c == cfg.grid.object_class.front()) facets[v.name] = std::to_string(s.facet_count());
                sets.push_back(std::move(s));
            } catch (const std::exception& e) {
                rejected[key] = e.what();
            }
        }

    GridOptions go;
    go.verify.budget = cfg.budget;
    go.verify.seed = cfg.seed;
    go.falsify_samples = cfg.falsify_samples;

    std::vector<CellResult> cells;
    for (const auto& ref : cfg.controllers) {
        std::vector<CellResult> part;
        try {
            const Controller ctrl = load_controller(ref.path.string());
            part = check_grid(ctrl, ref.name, sets, vhc_names, cfg.grid, go);
        } catch (const std::exception& e) {
            for (const auto& v : vhc_names)
                for (const auto& c : cfg.grid.object_class)
                    for (double vd : cfg.grid.v_d)
                        for (double th : cfg.grid.t_h_d) {
                            CellResult r;
                            r.cell = {v, c, vd, th};
                            r.controller = ref.name;
                            r.status = Status::ERROR;
                            r.note = std::string("controller file: ") + e.what();
                            part.push_back(std::move(r));
                        }
        }
        for (auto& r : part) {
            auto it = rejected.find(r.cell.vhc + "/" + r.cell.object_class);
            if (it != rejected.end() && r.status == Status::ERROR &&
                r.note.rfind("controller file:", 0) != 0)
                r.note = it->second;
            cells.push_back(std::move(r));
        }
    }

    write_file(out_dir / "report.json", report_to_json_text(cells));
    write_file(out_dir / "report.txt", verdict_table(cells, vhc_names, facets, false));
    write_file(out_dir / "counterexamples.csv", counterexamples_csv(cells));
    json timing = json::array();
    for (const auto& c : cells)
        timing.push_back({{"controller", c.controller}, {"vhc", c.cell.vhc},
                          {"v_d", c.cell.v_d}, {"t_h_d", c.cell.t_h_d},
                          {"object_class", c.cell.object_class},
                          {"wall_seconds", c.stats.wall_seconds}});
    write_file(out_dir / "timing.json",
               json({{"schema_version", kSchemaVersion}, {"kind", "check_timing"}, {"cells", timing}})
                       .dump(1) + "\n");
    io.out << verdict_table(cells, vhc_names, facets, true);

    int code = 0;
    for (const auto& c : cells) {
        if (c.status == Status::ERROR || c.status == Status::UNKNOWN) code = 2;
        else if (c.status == Status::UNSAFE && code == 0) code = 1;
        if (c.status != Status::SAFE && c.status != Status::UNSAFE)
            io.err << c.controller << " " << c.cell.vhc << ": " << to_string(c.status) << ": " << c.note << "\n";
    }
    return code;
}

int cmd_slice(const fs::path& safe_set, const std::string& fix, const fs::path& out_csv,
              int resolution, CommandIo io) {
    const SafeSet s = load_safe_set(safe_set);
    const SliceOutput out = compute_slice(s, parse_assignment(fix, s.vhc.k));
    if (out.empty) io.err << "warning: slice is empty\n";
    if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
    write_file(out_csv, slice_facets_csv(out));
    fs::path grid = out_csv;
    grid.replace_filename(out_csv.stem().string() + "_grid.csv");
    write_file(grid, slice_grid_csv(out, resolution));
    io.out << "slice over (";
    for (std::size_t i = 0; i < out.free_names.size(); ++i) io.out << (i ? ", " : "") << out.free_names[i];
    io.out << "): " << (out.empty ? 0 : out.poly.rows()) << " facets -> " << out_csv.string() << ", "
           << grid.string() << "\n";
    return 0;
}

}  // namespace accport
