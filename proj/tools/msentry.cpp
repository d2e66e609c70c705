// msentry: static scanner for shared ML model artifacts.
//
// Detects load-time code-execution constructs in .keras, .skops, legacy HDF5
// and pickle files by parsing bytes only; nothing from the scanned file is
// ever executed, imported, or instantiated.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "msentry/corpus.hpp"
#include "msentry/report.hpp"
#include "msentry/scan.hpp"

namespace fs = std::filesystem;
using namespace msentry;

namespace {

constexpr const char* kPolicyEnvVar = "MSENTRY_POLICY";

std::optional<Bytes> read_file(const fs::path& path, std::string& error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        error = "cannot open file";
        return std::nullopt;
    }
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        error = "read failure";
        return std::nullopt;
    }
    return data;
}

bool write_file(const fs::path& path, ByteSpan data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    return out.good();
}

Policy resolve_policy(const std::string& policy_path) {
    std::string path = policy_path;
    if (path.empty()) {
        if (const char* env = std::getenv(kPolicyEnvVar)) path = env;
    }
    if (path.empty()) return Policy::defaults();
    std::string err;
    auto data = read_file(path, err);
    if (!data) throw PolicyError("cannot read policy file " + path + ": " + err);
    return load_policy(*data);
}

// Deterministic expansion: CLI order first, directory contents sorted.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args, bool recursive,
                                    bool follow_symlinks, std::vector<std::string>& errors) {
    std::vector<fs::path> files;
    for (const auto& arg : args) {
        fs::path p(arg);
        std::error_code ec;
        fs::file_status st = follow_symlinks ? fs::status(p, ec) : fs::symlink_status(p, ec);
        if (ec) {
            files.push_back(p);  // scan() turns it into a per-file Error report
            continue;
        }
        if (fs::is_directory(st)) {
            if (!recursive) {
                errors.push_back(arg + " is a directory (use --recursive)");
                continue;
            }
            std::vector<fs::path> dir_files;
            auto opts = follow_symlinks ? fs::directory_options::follow_directory_symlink
                                        : fs::directory_options::none;
            for (auto it = fs::recursive_directory_iterator(p, opts, ec);
                 !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
                if (!follow_symlinks && it->is_symlink()) continue;
                if (it->is_regular_file()) dir_files.push_back(it->path());
            }
            std::sort(dir_files.begin(), dir_files.end());
            files.insert(files.end(), dir_files.begin(), dir_files.end());
        } else {
            files.push_back(p);
        }
    }
    return files;
}

int default_jobs() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return static_cast<int>(std::min(hw, 64u));
}

int run_scan(const std::vector<std::string>& inputs, const std::string& policy_path,
             const std::string& format, bool recursive, bool follow_symlinks, int jobs,
             bool permit_unsupported, bool omit_info) {
    Policy policy;
    try {
        policy = resolve_policy(policy_path);
    } catch (const PolicyError& e) {
        std::cerr << "msentry: " << e.what() << "\n";
        return 64;
    }

    std::vector<std::string> usage_errors;
    std::vector<fs::path> files = expand_inputs(inputs, recursive, follow_symlinks, usage_errors);
    for (const auto& e : usage_errors) std::cerr << "msentry: " << e << "\n";
    if (!usage_errors.empty()) return 64;
    if (files.empty()) {
        std::cerr << "msentry: no files to scan\n";
        return 64;
    }

    std::vector<ScanInput> work;
    std::vector<std::optional<std::string>> io_errors(files.size());
    work.reserve(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::string err;
        auto data = read_file(files[i], err);
        if (!data) {
            io_errors[i] = err;
            work.push_back({files[i].string(), {}});
        } else {
            work.push_back({files[i].string(), std::move(*data)});
        }
    }

    std::vector<ScanReport> reports = scan_many(work, policy, jobs);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (io_errors[i]) {
            reports[i].label = Label::Error;
            reports[i].error = *io_errors[i];
            reports[i].findings.clear();
            reports[i].analyzers.clear();
        }
    }

    if (format == "machine") {
        for (const auto& r : reports) {
            Bytes doc = render(r, RenderMode::MachineStructured);
            std::cout.write(reinterpret_cast<const char*>(doc.data()),
                            static_cast<std::streamsize>(doc.size()));
        }
    } else if (format == "interchange") {
        Bytes doc = render_interchange(reports, !omit_info);
        std::cout.write(reinterpret_cast<const char*>(doc.data()),
                        static_cast<std::streamsize>(doc.size()));
    } else {
        for (const auto& r : reports) {
            Bytes doc = render(r, RenderMode::HumanText);
            std::cout.write(reinterpret_cast<const char*>(doc.data()),
                            static_cast<std::streamsize>(doc.size()));
        }
    }
    std::cout.flush();
    return exit_code_for(reports, permit_unsupported);
}

int run_gen_corpus(const std::string& outdir) {
    fs::path dir(outdir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "msentry: cannot create " << outdir << ": " << ec.message() << "\n";
        return 64;
    }
    for (const auto& c : corpus::all_cases()) {
        corpus::Artifact a = corpus::gen_artifact(c.id);
        if (!write_file(dir / a.file_name, a.bytes)) {
            std::cerr << "msentry: cannot write " << (dir / a.file_name) << "\n";
            return 1;
        }
    }
    if (!write_file(dir / "manifest.json", corpus::manifest())) {
        std::cerr << "msentry: cannot write manifest\n";
        return 1;
    }
    std::cout << "wrote " << corpus::all_cases().size() << " artifacts + manifest to " << outdir
              << "\n";
    return 0;
}

int run_selftest() {
    auto t0 = std::chrono::steady_clock::now();
    fs::path dir = fs::temp_directory_path() /
                   ("msentry-selftest-" + std::to_string(static_cast<long>(::getpid())));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "selftest: cannot create temp dir\n";
        return 1;
    }

    Policy policy = Policy::defaults();
    bool all_ok = true;
    std::cout << "case                     expected    got         rules  result\n";
    for (const auto& c : corpus::all_cases()) {
        corpus::Artifact a = corpus::gen_artifact(c.id);
        fs::path file = dir / a.file_name;
        write_file(file, a.bytes);

        std::string err;
        auto data = read_file(file, err);
        ScanReport report = scan_bytes(file.filename().string(), data.value_or(Bytes{}), policy);

        bool label_ok = report.label == c.expected_label;
        bool rules_ok = true;
        for (const auto& rule : c.expected_rules) {
            bool found = false;
            for (const auto& f : report.findings)
                if (f.rule_id == rule) found = true;
            if (!found) rules_ok = false;
        }
        bool ok = label_ok && rules_ok;
        all_ok = all_ok && ok;

        char line[160];
        std::snprintf(line, sizeof line, "%-24s %-11s %-11s %-6s %s", c.name.c_str(),
                      std::string(label_name(c.expected_label)).c_str(),
                      std::string(label_name(report.label)).c_str(), rules_ok ? "ok" : "MISS",
                      ok ? "PASS" : "FAIL");
        std::cout << line << "\n";
    }
    fs::remove_all(dir, ec);

    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (all_ok ? "selftest: all cases match" : "selftest: MISMATCHES") << " ("
              << corpus::all_cases().size() << " cases, " << elapsed << " s)\n";
    return all_ok ? 0 : 1;
}

int run_rules() {
    for (const auto& r : rule_catalog()) {
        std::cout << r.id << "\n  severity:   " << severity_name(r.severity)
                  << "\n  analyzer:   " << r.analyzer << "\n  detects:    " << r.description
                  << "\n";
        if (!r.references.empty()) std::cout << "  references: " << r.references << "\n";
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"msentry - static security scanner for shared ML model artifacts"};
    app.require_subcommand(1);
    app.footer(
        "Exit codes (scan): 0 clean, 1 unsafe, 2 suspicious, 4 unsupported, 5 error,\n"
        "64 usage error. Precedence: error > unsafe > suspicious > unsupported > clean.\n"
        "Default policy file can be set via " +
        std::string(kPolicyEnvVar) + ".");

    auto* scan = app.add_subcommand("scan", "scan model files and report findings");
    std::vector<std::string> inputs;
    std::string policy_path;
    std::string format = "human";
    bool recursive = false;
    bool follow_symlinks = false;
    bool permit_unsupported = false;
    bool omit_info = false;
    int jobs = default_jobs();
    scan->add_option("paths", inputs, "files or directories to scan")->required();
    scan->add_option("--policy", policy_path, "policy file (JSON)");
    scan->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"human", "machine", "interchange"}));
    scan->add_flag("--recursive", recursive, "descend into directories");
    scan->add_flag("--follow-symlinks", follow_symlinks, "follow symlinks when recursing");
    scan->add_option("--jobs", jobs, "parallel scan workers (1-64)")
        ->check(CLI::Range(1, 64));
    scan->add_flag("--permit-unsupported", permit_unsupported,
                   "exit 0 instead of 4 when only unsupported files were seen");
    scan->add_flag("--omit-info", omit_info, "drop info-level findings from interchange output");

    auto* gen = app.add_subcommand("gen-corpus", "write the evaluation corpus and its manifest");
    std::string outdir;
    gen->add_option("outdir", outdir, "output directory")->required();

    auto* selftest = app.add_subcommand(
        "selftest", "generate the corpus, scan it, compare against the expected matrix");

    auto* rules = app.add_subcommand("rules", "print the threat-rule catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 64;
    }

    try {
        if (scan->parsed())
            return run_scan(inputs, policy_path, format, recursive, follow_symlinks, jobs,
                            permit_unsupported, omit_info);
        if (gen->parsed()) return run_gen_corpus(outdir);
        if (selftest->parsed()) return run_selftest();
        if (rules->parsed()) return run_rules();
    } catch (const std::exception& e) {
        std::cerr << "msentry: " << e.what() << "\n";
        return 5;
    }
    return 64;
}
