#include "enrichkit/jsonl.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"

namespace enrichkit {

void for_each_jsonl_line(const std::filesystem::path& file,
                         const std::function<void(std::size_t, const nlohmann::json&)>& visit) {
    std::ifstream in(file);
    if (!in) {
        throw io_error("cannot open '" + file.string() + "' for reading");
    }
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw decode_error(file.string() + ":" + std::to_string(line_number) + ": " + e.what());
        }
        visit(line_number, parsed);
    }
    if (in.bad()) {
        throw io_error("read failure on '" + file.string() + "'");
    }
}

std::string to_jsonl_line(const nlohmann::json& value) {
    // nlohmann::json objects iterate in key order, so dump() is canonical.
    return value.dump();
}

jsonl_writer::jsonl_writer(std::filesystem::path file) : final_path_(std::move(file)) {
    tmp_path_ = final_path_;
    tmp_path_ += ".tmp";
}

jsonl_writer::~jsonl_writer() {
    try {
        close();
    } catch (...) {
        // Destructor must not throw; close() explicitly to observe errors.
    }
}

void jsonl_writer::write(const nlohmann::json& value) {
    buffer_ += to_jsonl_line(value);
    buffer_ += '\n';
    ++lines_;
}

void jsonl_writer::close() {
    if (closed_) return;
    closed_ = true;
    if (final_path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(final_path_.parent_path(), ec);
    }
    {
        std::ofstream out(tmp_path_, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw io_error("cannot open '" + tmp_path_.string() + "' for writing");
        }
        out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
        if (!out) {
            throw io_error("write failure on '" + tmp_path_.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp_path_, final_path_, ec);
    if (ec) {
        throw io_error("cannot move '" + tmp_path_.string() + "' to '" + final_path_.string() +
                       "': " + ec.message());
    }
}

} // namespace enrichkit
