#pragma once

#include <stdexcept>
#include <string>

namespace judgecal {

// Base for every error the library raises. Each condition named in a module
// contract gets its own type so callers can catch precisely.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define JUDGECAL_ERROR_TYPE(Name)                                  \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& msg) : Error(msg) {}      \
    }

// dataset
JUDGECAL_ERROR_TYPE(ParseError);
JUDGECAL_ERROR_TYPE(SchemaError);
JUDGECAL_ERROR_TYPE(InsufficientData);
JUDGECAL_ERROR_TYPE(DegenerateSplit);
JUDGECAL_ERROR_TYPE(NoNumericFeatures);

// tabular_noise
JUDGECAL_ERROR_TYPE(InsufficientRows);
JUDGECAL_ERROR_TYPE(NonFiniteValue);
JUDGECAL_ERROR_TYPE(FactorizationFailure);

// judge
JUDGECAL_ERROR_TYPE(ContextOverflow);
JUDGECAL_ERROR_TYPE(TransportError);
JUDGECAL_ERROR_TYPE(RateLimited);
JUDGECAL_ERROR_TYPE(AuthError);
JUDGECAL_ERROR_TYPE(InvalidJudgeConfig);

// metrics
JUDGECAL_ERROR_TYPE(NoScoredPredictions);
JUDGECAL_ERROR_TYPE(ZeroVariance);

// stats
JUDGECAL_ERROR_TYPE(DegenerateDesign);
JUDGECAL_ERROR_TYPE(InvalidDf);
JUDGECAL_ERROR_TYPE(InvalidProbability);
JUDGECAL_ERROR_TYPE(EmptyGroup);

// protocol / cli
JUDGECAL_ERROR_TYPE(EligibilityError);
JUDGECAL_ERROR_TYPE(PartialRun);
JUDGECAL_ERROR_TYPE(ConfigMismatch);
JUDGECAL_ERROR_TYPE(ConfigError);
JUDGECAL_ERROR_TYPE(NoRunsFound);
JUDGECAL_ERROR_TYPE(IoError);

#undef JUDGECAL_ERROR_TYPE

} // namespace judgecal
