#pragma once

#include <stdexcept>
#include <string>

namespace dia {

// Root of the library's error hierarchy. Everything thrown on purpose
// derives from this, so callers can catch dia::Error at the boundary.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- chat template / transcript ---

// A template without a system role was asked to render a system message.
struct SystemUnsupported : Error {
    using Error::Error;
};

// A flat transcript did not match the template grammar (unbalanced or
// out-of-order markers, unexpected trailing bytes, missing bos text, ...).
struct MalformedTranscript : Error {
    using Error::Error;
};

// A message sequence violates conversation shape (system not first,
// two consecutive turns with the same role, ...).
struct MalformedConversation : Error {
    using Error::Error;
};

// A structured file (template registry, pool, endpoints config, records)
// failed to parse or failed field validation.
struct FormatError : Error {
    using Error::Error;
};

// --- payload building ---

struct EmptyFinalUser : Error {
    using Error::Error;
};

struct EmptyPrefill : Error {
    using Error::Error;
};

// --- auxiliary model interaction ---

// The auxiliary model's reply could not be parsed after all retries.
struct AuxParseFailure : Error {
    using Error::Error;
};

// The auxiliary model declined the task.
struct AuxRefusal : Error {
    using Error::Error;
};

// --- selection / demonstration ---

struct DimensionMismatch : Error {
    using Error::Error;
};

struct TooFewKeywords : Error {
    using Error::Error;
};

// --- endpoints ---

struct EndpointError : Error {
    using Error::Error;
};

struct Timeout : EndpointError {
    using EndpointError::EndpointError;
};

struct HttpError : EndpointError {
    int status;
    HttpError(int status_, const std::string& what_)
        : EndpointError(what_), status(status_) {}
};

struct RetriesExhausted : EndpointError {
    using EndpointError::EndpointError;
};

struct EmptyInput : Error {
    using Error::Error;
};

// The safety classifier's reply was not a recognizable verdict. Verdicts
// are never silently coerced to "safe".
struct GuardParseFailure : Error {
    using Error::Error;
};

// --- campaign ---

struct EmptyDataset : Error {
    using Error::Error;
};

struct MissingAnnotation : Error {
    using Error::Error;
};

} // namespace dia
