#include "qrem/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrem/errors.hpp"

namespace qrem {

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw ValidationError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ValidationError("rename failed for " + path + ": " + ec.message());
}

void atomic_write_json(const std::string& path, const nlohmann::json& j, int indent) {
    atomic_write_text(path, j.dump(indent) + "\n");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed json in " + path + ": " + e.what());
    }
}

} // namespace qrem
