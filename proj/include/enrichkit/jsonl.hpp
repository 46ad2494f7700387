#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace enrichkit {

/// Calls visit(line_number, parsed) for every non-blank line of a
/// line-delimited JSON file. Parse failures and unreadable files raise
/// decode_error / io_error with the path and line number.
void for_each_jsonl_line(const std::filesystem::path& file,
                         const std::function<void(std::size_t, const nlohmann::json&)>& visit);

/// Serializes one value per line using compact, key-sorted JSON. This is
/// the canonical on-disk encoding; identical values always produce
/// identical bytes.
std::string to_jsonl_line(const nlohmann::json& value);

/// Streaming jsonl writer with atomic-rename semantics: the file appears
/// at its final path only once close() (or the destructor) completes.
class jsonl_writer {
public:
    explicit jsonl_writer(std::filesystem::path file);
    ~jsonl_writer();

    jsonl_writer(const jsonl_writer&) = delete;
    jsonl_writer& operator=(const jsonl_writer&) = delete;

    void write(const nlohmann::json& value);
    std::size_t lines_written() const { return lines_; }
    void close();

private:
    std::filesystem::path final_path_;
    std::filesystem::path tmp_path_;
    std::string buffer_;
    std::size_t lines_ = 0;
    bool closed_ = false;
};

} // namespace enrichkit
