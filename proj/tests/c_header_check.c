/*
 *     Copyright 2026 The rml authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

/* Compiles the public header as C and calls into the library. */

#include "rml/rml.h"

#include <stdio.h>

int main(void) {
  rml_problem* p = NULL;
  double x = 1.9, v = 0.0;
  if (rml_problem_builtin("example1", &p) != RML_OK) {
    fprintf(stderr, "%s\n", rml_last_error());
    return 1;
  }
  if (rml_log_target_marginal(p, &x, &v) != RML_OK) return 1;
  rml_problem_free(p);
  printf("rml %s: log target at 1.9 = %.12f\n", rml_version(), v);
  return (v < -0.0448 && v > -0.0449) ? 0 : 1;
}
