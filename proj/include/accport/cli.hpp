#pragma once

#include "accport/checker.hpp"

#include <filesystem>
#include <ostream>

namespace accport {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

enum class Dimension { speed, length, time, acceleration };
// "130 km/h" -> 36.11 m/s; a bare number or a unit of the wrong dimension is rejected.
double parse_quantity(const std::string& text, Dimension dim);

struct ControllerRef {
    std::string name;
    std::filesystem::path path;
};

struct RunConfig {
    std::vector<VhcParams> vhcs;
    OddParams odd;
    DriverGrid grid;
    std::vector<ControllerRef> controllers;
    FrontModel front = FrontModel::stopping;
    int max_iter = 100;
    std::uint64_t seed = 1;
    long budget = 200000;
    long falsify_samples = 20000;
    int workers = 0;  // 0: OpenMP default
};

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

std::string safe_set_to_json_text(const SafeSet& s);
SafeSet safe_set_from_json_text(const std::string& text);
SafeSet load_safe_set(const std::filesystem::path& path);
std::string safe_set_file_name(const std::string& vhc, const std::string& object_class);

std::string report_to_json_text(const std::vector<CellResult>& cells);
std::string counterexamples_csv(const std::vector<CellResult>& cells);

struct SliceAssignment {
    std::vector<std::optional<double>> fixed;
};
// "v_T=20,delay=0": delay fixes every queued input; delayN one of them.
SliceAssignment parse_assignment(const std::string& text, int k);

struct SliceOutput {
    std::vector<std::string> free_names;
    HPolytope poly;
    bool empty = false;
};
SliceOutput compute_slice(const SafeSet& s, const SliceAssignment& a);
std::string slice_facets_csv(const SliceOutput& s);
std::string slice_grid_csv(const SliceOutput& s, int resolution);

struct CommandIo {
    std::ostream& out;
    std::ostream& err;
};

int cmd_rcis(const RunConfig& cfg, const std::filesystem::path& out_dir, CommandIo io);
int cmd_check(const RunConfig& cfg, const std::filesystem::path& sets_dir,
              const std::filesystem::path& out_dir, CommandIo io);
int cmd_slice(const std::filesystem::path& safe_set, const std::string& fix,
              const std::filesystem::path& out_csv, int resolution, CommandIo io);

}  // namespace accport
