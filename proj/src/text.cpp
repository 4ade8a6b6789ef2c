#include "torusflow/text.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#ifndef TORUSFLOW_VERSION
#define TORUSFLOW_VERSION "0.0.0"
#endif

namespace torusflow {

const char* version() { return TORUSFLOW_VERSION; }

std::string fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string config_hash(Settings settings) {
    std::sort(settings.begin(), settings.end());
    std::string canonical;
    for (const auto& [k, v] : settings) canonical += k + "=" + v + "\n";
    return hex64(fnv1a64(canonical));
}

std::string comment_header(std::string_view command, const Settings& settings, std::string_view prefix) {
    std::string out;
    auto line = [&](const std::string& s) {
        out += prefix;
        out += s;
        out += '\n';
    };
    line(std::string("torusflow ") + version());
    line("command=" + std::string(command));
    line("config_hash=" + config_hash(settings));
    for (const auto& [k, v] : settings) line(k + "=" + v);
    return out;
}

}  // namespace torusflow
