#pragma once

#include <stdexcept>
#include <string>

namespace enrichkit {

/// Base class for all errors raised by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A malformed payload, file, or record. The message names the offending
/// field or line where possible.
struct decode_error : error {
    using error::error;
};

/// Invalid or missing configuration (endpoints, credentials, paths).
struct config_error : error {
    using error::error;
};

/// File or directory I/O failure; the message carries the path.
struct io_error : error {
    using error::error;
};

/// A violated operation precondition (zero limits, empty required input).
struct precondition_error : error {
    using error::error;
};

/// Duplicate identifier where uniqueness is required.
struct duplicate_id_error : error {
    using error::error;
};

/// A feature keyword with no entry in the keyword-to-concept mapping.
struct unmapped_keyword_error : error {
    using error::error;
};

/// Offline run hit a query with no cached response; names the query.
struct offline_miss_error : error {
    using error::error;
};

/// Remote request failure. Retryable by nature; carries the HTTP-level cause.
struct network_error : error {
    using error::error;
};

/// Strict-mode evaluation found ranked entries without judgments.
struct judgment_gap_error : error {
    using error::error;
};

} // namespace enrichkit
