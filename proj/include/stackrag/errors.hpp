#pragma once

#include <stdexcept>
#include <string>

namespace stackrag {

// Root of the library's error hierarchy. Catching stackrag::Error catches
// everything thrown by this library except std::bad_alloc and friends.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (empty input, bad dimension
// bounds, ...). These indicate bugs in the caller, not runtime conditions.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Network failure or unexpected HTTP status after retries were exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

// HTTP 401/403 from the LLM provider. Never retried.
class AuthError : public Error {
 public:
  using Error::Error;
};

// HTTP 429 from the LLM provider, still failing after retries.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Model output could not be parsed into the expected shape after a re-ask.
class ParseError : public Error {
 public:
  using Error::Error;
};

// The daily StackExchange call quota is spent.
class QuotaExhausted : public Error {
 public:
  using Error::Error;
};

// The StackExchange API returned a backoff field; no request may be sent
// for the stated number of seconds.
class BackoffRequested : public Error {
 public:
  explicit BackoffRequested(int seconds)
      : Error("stackexchange requested a backoff of " +
              std::to_string(seconds) + "s"),
        seconds_(seconds) {}

  int seconds() const { return seconds_; }

 private:
  int seconds_;
};

// Vector dimensions disagree with the configured store dimension.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Cosine similarity of an all-zero vector is undefined.
class ZeroVector : public Error {
 public:
  using Error::Error;
};

// Persistent store I/O failed; the write was not committed.
class StorageError : public Error {
 public:
  using Error::Error;
};

// Evidence retrieval was asked to run against an empty vector store.
class EmptyStore : public Error {
 public:
  using Error::Error;
};

// Replay mode has no recorded response for a request. The message names
// the request signature so the missing fixture can be recorded.
class FixtureMiss : public Error {
 public:
  using Error::Error;
};

// The searching-and-storing step kept failing after its retry budget.
class SearchFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace stackrag
