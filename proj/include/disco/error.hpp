#pragma once

#include <stdexcept>
#include <string>

namespace disco {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DISCO_DEFINE_ERROR(Name, Base)  \
  class Name : public Base {            \
   public:                              \
    using Base::Base;                   \
  };

// corpus
DISCO_DEFINE_ERROR(MalformedUrl, Error)

// ranking
DISCO_DEFINE_ERROR(DegenerateFeature, Error)
DISCO_DEFINE_ERROR(InsufficientNegatives, Error)
DISCO_DEFINE_ERROR(MismatchedCandidateSets, Error)

// providers and operators
DISCO_DEFINE_ERROR(ProviderError, Error)
DISCO_DEFINE_ERROR(OperatorUnavailable, ProviderError)
DISCO_DEFINE_ERROR(FetchError, Error)
DISCO_DEFINE_ERROR(NotFound, FetchError)

// engine
DISCO_DEFINE_ERROR(ConfigError, Error)
DISCO_DEFINE_ERROR(CorruptSnapshot, Error)

// simweb
DISCO_DEFINE_ERROR(SpecError, Error)
DISCO_DEFINE_ERROR(UnknownSite, Error)

// eval
DISCO_DEFINE_ERROR(MetricError, Error)
DISCO_DEFINE_ERROR(KTooLarge, MetricError)
DISCO_DEFINE_ERROR(NoRelevantInList, MetricError)
DISCO_DEFINE_ERROR(EmptyDiscovery, MetricError)
DISCO_DEFINE_ERROR(EmptyUniverse, MetricError)

#undef DISCO_DEFINE_ERROR

}  // namespace disco
