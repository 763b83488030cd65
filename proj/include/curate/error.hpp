#pragma once

#include <stdexcept>
#include <string>

namespace curate {

// Base class for all pipeline errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Record parsing / validation.
struct MalformedRecord : Error { using Error::Error; };
struct EncodingError : Error { using Error::Error; };

// Per-document preconditions.
struct EmptyDocument : Error { using Error::Error; };
struct EmptyShingleSet : Error { using Error::Error; };

// Dedup.
struct SignatureMismatch : Error { using Error::Error; };

// Repo context.
struct DuplicatePath : Error { using Error::Error; };

// Decontamination.
struct UndefinedMetric : Error { using Error::Error; };

// FIM. These are control signals as much as errors: the stream transform
// catches them and passes the document through with a flag.
struct NotTransformable : Error { using Error::Error; };
struct SentinelCollision : Error { using Error::Error; };
struct MalformedFim : Error { using Error::Error; };

// Mixer.
struct InsufficientPool : Error { using Error::Error; };

// Reporting.
struct EmptyPipeline : Error { using Error::Error; };

// Configuration.
struct ConfigError : Error { using Error::Error; };

}  // namespace curate
