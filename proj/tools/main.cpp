#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "chainroute/cli.hpp"

int main(int argc, char** argv) {
    using chainroute::CliInvocation;

    CLI::App app{"Risk-bounded chain routing simulator and benchmark harness"};
    app.require_subcommand(1);

    CliInvocation inv;
    if (const char* env = std::getenv("CHAINROUTE_SEED"))
        inv.seed = std::strtoull(env, nullptr, 10);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", inv.config_path, "Scenario config JSON (default: built-in)");
        cmd->add_option("--seed", inv.seed, "RNG seed");
        cmd->add_option("--out-dir", inv.out_dir, "Output directory");
    };

    CLI::App* run = app.add_subcommand("run", "Run the experiment grid");
    add_common(run);
    run->add_option("--algo", inv.algo, "Algorithm, comma list, or 'all'");
    run->add_option("--tokens", inv.tokens, "Token lengths")->delimiter(',');
    run->add_option("--requests", inv.requests, "Requests per (algo, tokens) pair");

    CLI::App* bench = app.add_subcommand("bench", "Selection-overhead benchmark");
    add_common(bench);
    bench->add_option("--sizes", inv.sizes, "Network sizes")->delimiter(',');
    bench->add_option("--trials", inv.trials, "Trials per (algorithm, size)");

    CLI::App* oracle = app.add_subcommand("oracle-check", "Search-vs-oracle equivalence check");
    oracle->add_option("--seed", inv.seed, "RNG seed");
    oracle->add_option("--instances", inv.instances, "Random instances to check");

    CLI::App* exp = app.add_subcommand("export", "Dump registry JSON and routing DAG edge list");
    add_common(exp);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return chainroute::cmd_run(inv);
    if (bench->parsed()) return chainroute::cmd_bench(inv);
    if (oracle->parsed()) return chainroute::cmd_oracle_check(inv);
    if (exp->parsed()) return chainroute::cmd_export(inv);
    return 1;
}
