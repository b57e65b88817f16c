#include <iostream>

#include <CLI11.hpp>

#include "qas/commands.hpp"

int main(int argc, char **argv) {
    CLI::App app{"Ansatz search by nested Monte-Carlo tree search"};
    app.require_subcommand(1);

    qas::CommandOptions opts;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t shots = 0;
    std::size_t steps = 0;

    auto *search = app.add_subcommand("search", "search for a circuit and write best_circuit.json");
    search->add_option("--config", opts.config, "run configuration (YAML)")->required();

    auto *finetune = app.add_subcommand("finetune", "optimise the parameters of a searched circuit");
    finetune->add_option("circuit", opts.circuit, "best_circuit.json")->required();
    finetune->add_option("--config", opts.config, "take the finetune block from this configuration");
    finetune->add_option("--steps", steps, "optimisation steps (default 200)");

    auto *sample = app.add_subcommand("sample", "sample bitstrings from a circuit");
    sample->add_option("circuit", opts.circuit, "circuit file")->required();
    sample->add_option("--shots", shots, "number of shots (default 1e6)");

    auto *oracle = app.add_subcommand("oracle", "brute-force reference solution for a task");
    oracle->add_option("--config", opts.config, "run configuration (YAML)")->required();

    auto *exp = app.add_subcommand("export", "print a circuit as OpenQASM 2.0 or text");
    exp->add_option("circuit", opts.circuit, "circuit file")->required();
    exp->add_option("--format", opts.format, "qasm2 or text")
        ->check(CLI::IsMember({"qasm2", "text"}));

    for (auto *sub : {search, finetune, sample, oracle, exp}) {
        sub->add_option("--seed", seed, "seed for every stochastic component");
        sub->add_option("--out", out, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qas::kExitInput;
    }

    std::string command;
    for (auto *sub : app.get_subcommands()) command = sub->get_name();
    auto *active = app.get_subcommands().front();
    if (active->count("--seed")) opts.seed = seed;
    if (active->count("--out")) opts.out = out;
    if (active == sample && active->count("--shots")) opts.shots = shots;
    if (active == finetune && active->count("--steps")) opts.steps = steps;

    try {
        if (command == "search") qas::cmd_search(opts, std::cout);
        else if (command == "finetune") qas::cmd_finetune(opts, std::cout);
        else if (command == "sample") qas::cmd_sample(opts, std::cout);
        else if (command == "oracle") qas::cmd_oracle(opts, std::cout);
        else qas::cmd_export(opts, std::cout);
    } catch (const std::exception &e) {
        std::cerr << "qas " << command << ": " << e.what() << "\n";
        return qas::exit_code(e, command);
    }
    return qas::kExitOk;
}
