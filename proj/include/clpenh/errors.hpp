// Copyright 2026 The clpenh Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace clpenh {

// Base of every error raised by the library. Callers that only care about
// "did it work" catch this; the subclasses name the failure mode.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CLPENH_DEFINE_ERROR(Name) \
  class Name : public Error {     \
   public:                        \
    using Error::Error;           \
  }

CLPENH_DEFINE_ERROR(IoError);
CLPENH_DEFINE_ERROR(FormatError);
CLPENH_DEFINE_ERROR(UnsupportedCodecError);
CLPENH_DEFINE_ERROR(DegenerateSignalError);
CLPENH_DEFINE_ERROR(TooShortError);
CLPENH_DEFINE_ERROR(DimensionMismatchError);
CLPENH_DEFINE_ERROR(ParseError);
CLPENH_DEFINE_ERROR(AnnotationError);
CLPENH_DEFINE_ERROR(ConfigError);
CLPENH_DEFINE_ERROR(TemplateNotFoundError);
CLPENH_DEFINE_ERROR(InsufficientDataError);
CLPENH_DEFINE_ERROR(AlignmentError);
CLPENH_DEFINE_ERROR(ModelFormatError);

#undef CLPENH_DEFINE_ERROR

}  // namespace clpenh
