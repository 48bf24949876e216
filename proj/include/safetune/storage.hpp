#pragma once

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

namespace safetune {

struct StorageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Test hook invoked at named points of the persistence protocol. A test can
// terminate the process there to simulate a crash.
inline std::function<void(std::string_view)>& fault_hook()
{
    static std::function<void(std::string_view)> hook;
    return hook;
}

inline void fault_point(std::string_view name)
{
    if (auto& h = fault_hook()) h(name);
}

namespace io {

inline void write_all(int fd, const std::string& data, const std::filesystem::path& p)
{
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw StorageError(p.string() + ": write failed: " + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

inline void sync_dir(const std::filesystem::path& dir)
{
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

// Appends one newline-terminated record and flushes it to disk before
// returning.
inline void append_line(const std::filesystem::path& p, const std::string& line)
{
    const int fd = ::open(p.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) throw StorageError(p.string() + ": cannot open for append: " + std::strerror(errno));
    try {
        write_all(fd, line + "\n", p);
    } catch (...) {
        ::close(fd);
        throw;
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw StorageError(p.string() + ": fsync failed");
    }
    ::close(fd);
}

// Replaces `p` so that readers see either the old or the new content.
inline void write_atomic(const std::filesystem::path& p, const std::string& content)
{
    const std::filesystem::path tmp = p.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw StorageError(tmp.string() + ": cannot create: " + std::strerror(errno));
    try {
        write_all(fd, content, tmp);
    } catch (...) {
        ::close(fd);
        throw;
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw StorageError(tmp.string() + ": fsync failed");
    }
    ::close(fd);
    fault_point("before_rename");
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) throw StorageError(p.string() + ": rename failed: " + ec.message());
    sync_dir(p.parent_path());
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StorageError(p.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Complete lines of a journal. A trailing fragment without a newline is a
// record torn by a crash; it is cut from the file so later appends start on a
// clean line.
inline std::vector<std::string> read_journal(const std::filesystem::path& p)
{
    std::vector<std::string> lines;
    if (!std::filesystem::exists(p)) return lines;
    const std::string data = read_file(p);
    std::size_t start = 0;
    while (start < data.size()) {
        const std::size_t nl = data.find('\n', start);
        if (nl == std::string::npos) {
            std::filesystem::resize_file(p, start);
            break;
        }
        if (nl > start) lines.push_back(data.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace io
}  // namespace safetune
