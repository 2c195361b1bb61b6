#include "bscript/resources.hpp"

#include "bscript/error.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace bscript {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_document: return "invalid_document";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::overlap: return "overlap";
    case ErrorCode::unknown_id: return "unknown_id";
    case ErrorCode::revision_conflict: return "revision_conflict";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::missing_model: return "missing_model";
    case ErrorCode::missing_corpus: return "missing_corpus";
    case ErrorCode::provider_unavailable: return "provider_unavailable";
    case ErrorCode::auth_failure: return "auth_failure";
    case ErrorCode::duplicate_name: return "duplicate_name";
    case ErrorCode::single_class: return "single_class";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

std::filesystem::path data_dir()
{
    if (const char* env = std::getenv("BSCRIPT_DATA_DIR"); env != nullptr && *env != '\0')
        return env;
#ifdef BSCRIPT_SOURCE_DATA_DIR
    if (std::filesystem::exists(BSCRIPT_SOURCE_DATA_DIR))
        return BSCRIPT_SOURCE_DATA_DIR;
#endif
#ifdef BSCRIPT_INSTALL_DATA_DIR
    return BSCRIPT_INSTALL_DATA_DIR;
#else
    return "data";
#endif
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0)
        throw Error(ErrorCode::io_error, "cannot create " + tmp.string());
    std::size_t written = 0;
    while (written < content.size()) {
        const ssize_t n = ::write(fd, content.data() + written, content.size() - written);
        if (n < 0) {
            ::close(fd);
            throw Error(ErrorCode::io_error, "write failed for " + tmp.string());
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        throw Error(ErrorCode::io_error, "fsync failed for " + tmp.string());
    }
    ::close(fd);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error(ErrorCode::io_error, "rename to " + path.string() + " failed: " + ec.message());
}

}  // namespace bscript
