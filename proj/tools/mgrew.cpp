#include <mgrew/errors.hpp>
#include <mgrew/interpreter.hpp>
#include <mgrew/matcher.hpp>
#include <mgrew/reader.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace {

struct SessionConfig {
    std::vector<std::string> space_paths;
    std::int64_t fuel = 10000;
    std::optional<std::string> trace_path;
    std::optional<std::string> run_script;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mgrew::Error("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void append_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw mgrew::Error("cannot write file: " + path);
    out << text;
}

mgrew::Metagraph load_session_space(const SessionConfig& config) {
    mgrew::Metagraph space;
    for (const std::string& path : config.space_paths) {
        for (const mgrew::Expression& expr : mgrew::parse_stream(read_file(path))) {
            space.add_expression(expr);
        }
    }
    if (config.run_script) {
        for (const mgrew::Expression& expr : mgrew::parse_stream(read_file(*config.run_script))) {
            space.add_expression(expr);
        }
    }
    return space;
}

bool is_activation(const mgrew::Metagraph& space, mgrew::EdgeId root) {
    const mgrew::Edge& edge = space.get_edge(root);
    if (!edge.label.is_list() || edge.targets.size() != 2) return false;
    const mgrew::Edge& head = space.get_edge(edge.targets[0]);
    return head.label.is_symbol() && head.label.name() == "@" && head.targets.empty();
}

int run_script(const SessionConfig& config) {
    mgrew::Metagraph space;
    try {
        space = load_session_space(config);
    } catch (const mgrew::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mgrew::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    mgrew::Interpreter interpreter(space);
    for (const mgrew::EdgeId& root : space.roots()) {
        if (!is_activation(space, root)) continue;
        try {
            if (config.trace_path) {
                const mgrew::Expression target =
                    space.lift(space.get_edge(root).targets[1]);
                mgrew::EvalOutcome outcome = interpreter.run_with_trace(target, config.fuel);
                append_file(*config.trace_path,
                            mgrew::trace_to_json_lines(outcome, interpreter.view()));
                for (const mgrew::Expression& result : outcome.results) {
                    std::cout << result.to_text() << "\n";
                }
            } else {
                for (const mgrew::Expression& result : interpreter.activate(root, config.fuel)) {
                    std::cout << result.to_text() << "\n";
                }
            }
        } catch (const mgrew::EvalError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}

std::string format_bindings(const mgrew::Bindings& bindings) {
    std::string out = "{";
    bool first = true;
    for (const auto& [name, entry] : bindings.entries()) {
        if (!first) out += ", ";
        first = false;
        out += "$" + name + " -> ";
        out += bindings.space() ? bindings.space()->lift(entry.referent).to_text() : "?";
    }
    out += "}";
    return out;
}

int repl(const SessionConfig& config) {
    mgrew::Metagraph space;
    try {
        space = load_session_space(config);
    } catch (const mgrew::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const bool interactive = isatty(fileno(stdin)) != 0;
    bool tracing = false;
    std::string line;
    while (true) {
        if (interactive) std::cout << "mgrew> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        const std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        try {
            if (line[start] != '!') {
                space.add_expression(mgrew::parse(line));
                continue;
            }
            std::istringstream words(line.substr(start));
            std::string directive;
            words >> directive;
            std::string rest;
            std::getline(words, rest);
            if (directive == "!quit") {
                return 0;
            } else if (directive == "!eval") {
                const mgrew::Expression expr = mgrew::parse(rest);
                mgrew::Interpreter interpreter(space);
                if (tracing) {
                    mgrew::EvalOutcome outcome = interpreter.run_with_trace(expr, config.fuel);
                    const std::string json =
                        mgrew::trace_to_json_lines(outcome, interpreter.view());
                    if (config.trace_path) {
                        append_file(*config.trace_path, json);
                    } else {
                        std::cout << json;
                    }
                    for (const mgrew::Expression& result : outcome.results) {
                        std::cout << result.to_text() << "\n";
                    }
                } else {
                    for (const mgrew::Expression& result : interpreter.eval(expr, config.fuel)) {
                        std::cout << result.to_text() << "\n";
                    }
                }
            } else if (directive == "!match") {
                const mgrew::Expression pattern = mgrew::parse(rest);
                for (const mgrew::MatchResult& m : mgrew::match(space, pattern)) {
                    std::cout << format_bindings(m.bindings) << "\n";
                }
            } else if (directive == "!transform") {
                const std::vector<mgrew::Expression> parts = mgrew::parse_stream(rest);
                if (parts.size() != 2) {
                    throw mgrew::Error("!transform takes a pattern and a template");
                }
                for (const mgrew::Expression& result :
                     mgrew::transform(space, parts[0], parts[1])) {
                    std::cout << result.to_text() << "\n";
                }
            } else if (directive == "!dump") {
                std::size_t begin = rest.find_first_not_of(" \t");
                if (begin == std::string::npos) throw mgrew::Error("!dump needs a path");
                std::size_t stop = rest.find_last_not_of(" \t\r");
                const std::string path = rest.substr(begin, stop - begin + 1);
                std::ofstream out(path, std::ios::binary);
                if (!out) throw mgrew::Error("cannot write file: " + path);
                out << mgrew::dump(space);
            } else if (directive == "!trace") {
                std::istringstream arg(rest);
                std::string mode;
                arg >> mode;
                if (mode == "on") {
                    tracing = true;
                } else if (mode == "off") {
                    tracing = false;
                } else {
                    throw mgrew::Error("!trace takes on or off");
                }
            } else {
                throw mgrew::Error("unknown directive: " + directive);
            }
        } catch (const mgrew::Error& e) {
            std::cout << "error: " << e.what() << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metagraph rewriting engine and interpreter"};
    SessionConfig config;
    app.add_option("--space", config.space_paths, "space file to load (repeatable)");
    app.add_option("--fuel", config.fuel, "evaluation step budget")->check(CLI::PositiveNumber);
    std::string trace_path;
    auto* trace_opt = app.add_option("--trace", trace_path, "trace output file (JSON lines)");
    std::string script_path;
    auto* run_opt = app.add_option("--run", script_path, "script to run instead of the REPL");
    CLI11_PARSE(app, argc, argv);
    if (*trace_opt) config.trace_path = trace_path;
    if (*run_opt) config.run_script = script_path;

    return config.run_script ? run_script(config) : repl(config);
}
