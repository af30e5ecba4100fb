// ddlab: command-line workbench over the diagram library. Subcommands: dims,
// table, verify, enumerate, templates. Exit codes: 0 success, 1 verification
// or expected-value failure, 2 usage error, 3 budget exceeded.
#include "ddlab/workbench.hpp"

#include <CLI11.hpp>

using namespace ddlab;

int main(int argc, char** argv) {
    CLI::App app{"diagram-algebra workbench for finite-type link invariants"};
    app.fallthrough();

    WorkbenchConfig cfg;
    std::string cache_flag;
    app.add_option("--format", cfg.format, "output format: text or json")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    app.add_option("--cache-dir", cache_flag, "echelon cache directory (also env DDLAB_CACHE)");
    app.add_option("--seed", cfg.seed, "seed for randomized helpers")->capture_default_str();
    app.add_option("--budget", cfg.budget, "raw-arrangement budget per stratum")
        ->capture_default_str();

    std::string kind_str = "dd";
    int degree = -1, components = -1;

    auto* dims = app.add_subcommand("dims", "quotient dimension of one stratum");
    dims->add_option("kind,--kind", kind_str, "dd, wedge, or chord");
    dims->add_option("degree,--degree", degree, "diagram degree")->required();
    dims->add_option("components,--components", components, "skeleton circle count")->required();

    int max_degree = 2, max_components = 4;
    auto* table = app.add_subcommand("table", "dimension grid with expected-value checks");
    table->add_option("max_degree", max_degree, "largest degree")->capture_default_str();
    table->add_option("max_components", max_components, "largest circle count")
        ->capture_default_str();

    std::string check;
    auto* verify = app.add_subcommand("verify", "run one verification check");
    verify->add_option("check", check,
                       "iota-relations | nu-wellposed | iota-nu | wedge-onto | strutless | "
                       "knot-bijection | nu3-fails | stu-confluence")
        ->required();
    verify->add_option("--degree", degree, "largest degree (per-check default when omitted)");
    verify->add_option("--components", components,
                       "largest circle count (per-check default when omitted)");

    auto* enumerate = app.add_subcommand("enumerate", "list a stratum's canonical diagrams");
    enumerate->add_option("kind,--kind", kind_str, "dd, chord, wedge, or trivalent")->required();
    enumerate->add_option("degree,--degree", degree, "diagram degree")->required();
    enumerate->add_option("components,--components", components, "skeleton circle count")
        ->required();

    std::string action = "dump";
    auto* templates = app.add_subcommand("templates", "dump or hash the active template set");
    templates->add_option("action", action, "dump or hash")->required();

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    cfg.cache_dir = resolve_cache_dir(cache_flag);

    try {
        if (*dims) {
            DimensionReport r = cmd_dims(cfg, parse_kind(kind_str), degree, components);
            if (cfg.format == "json") *cfg.out << report_json(r).dump(2) << "\n";
            else *cfg.out << report_text(r);
            return 0;
        }
        if (*table) return cmd_table(cfg, max_degree, max_components);
        if (*verify) {
            VerificationResult res = cmd_verify(cfg, check, degree, components);
            print_verification(cfg, res);
            return res.passed ? 0 : 1;
        }
        if (*enumerate) return cmd_enumerate(cfg, parse_kind(kind_str), degree, components);
        if (*templates) return cmd_templates(cfg, action);
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << " (estimated " << e.estimate
                  << " raw arrangements; rerun with a larger --budget)\n";
        return 3;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
