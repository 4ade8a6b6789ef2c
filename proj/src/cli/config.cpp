#include <fstream>
#include <stdexcept>

#include "torusflow/cli.hpp"

namespace torusflow::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> load_config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(number) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        while (!key.empty() && key.front() == '-') key.erase(0, 1);
        if (key.empty() || key == "config")
            throw std::runtime_error(path + ":" + std::to_string(number) + ": invalid key");
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

std::vector<std::string> splice_config(std::vector<std::string> args) {
    std::vector<std::string> kept;
    std::vector<std::string> from_files;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        std::string path;
        if (a == "--config") {
            if (i + 1 >= args.size()) throw std::runtime_error("--config requires a file argument");
            path = args[++i];
        } else if (a.rfind("--config=", 0) == 0) {
            path = a.substr(9);
        } else {
            kept.push_back(a);
            continue;
        }
        auto tokens = load_config_tokens(path);
        from_files.insert(from_files.end(), tokens.begin(), tokens.end());
    }
    if (from_files.empty()) return kept;
    // The subcommand is the first token that is not an option.
    std::size_t at = 0;
    while (at < kept.size() && !kept[at].empty() && kept[at].front() == '-') ++at;
    if (at == kept.size()) throw std::runtime_error("--config given without a subcommand");
    kept.insert(kept.begin() + static_cast<std::ptrdiff_t>(at) + 1, from_files.begin(), from_files.end());
    return kept;
}

}  // namespace torusflow::cli
