/* Compiles the public header as C and exercises a few calls. */
#include <stdio.h>

#include "fockbench/fockbench.h"

int main(void) {
  fb_scenario* s = NULL;
  fb_result* r = NULL;
  fb_status st = fb_scenario_parse("engine: decay\nloss: {kind: linear, kappa: 1}\n"
                                   "initial: {kind: fock, n: 3}\nnumerics: {t_final: 1, report_count: 2}\n",
                                   "c.cfg", &s);
  if (st != FB_OK) {
    fprintf(stderr, "%s\n", fb_last_error());
    return 1;
  }
  st = fb_run(s, 1, &r);
  if (st != FB_OK || fb_result_table_count(r) < 2) return 1;
  fb_result_free(r);
  fb_scenario_free(s);
  return 0;
}
