#ifndef TIMEDSESS_H
#define TIMEDSESS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TS_PASS 0

#define TS_FAIL 1

#define TS_INCONCLUSIVE 2

#define TS_BAD_INPUT 3

/*
 A required pointer argument was null.
 */
#define TS_NULL_ARGUMENT -1

/*
 A string argument was not UTF-8.
 */
#define TS_INVALID_UTF8 -2

/*
 The library panicked; the call had no effect.
 */
#define TS_INTERNAL -3

/*
 A computable trajectory certificate.
 */
typedef struct TsCert TsCert;

/*
 A parsed spec file.
 */
typedef struct TsSpec TsSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a spec file. On failure `*out_spec` is left null and the parse
 error is written to `out_message`, which may be null.
 */
int32_t ts_spec_parse(const char *src, struct TsSpec **out_spec, char **out_message);

void ts_spec_free(struct TsSpec *spec);

/*
 Type checks every process of the spec.
 */
int32_t ts_check(const struct TsSpec *spec, char **out_report);

/*
 Executes a run directive, picked by index or target name, or the only
 one when `run` is null. A zero horizon uses the directive's own.
 */
int32_t ts_run(const struct TsSpec *spec, const char *run, uint64_t horizon, char **out_report);

/*
 Builds the witness of a process, or of the only process when `proc_name`
 is null, at the default valuation of its time variables.
 */
int32_t ts_witness(const struct TsSpec *spec,
                   const char *proc_name,
                   uint64_t horizon,
                   struct TsCert **out_cert,
                   char **out_report);

/*
 Checks the witness of each process, or of one, against its type.
 */
int32_t ts_semcheck(const struct TsSpec *spec,
                    const char *proc_name,
                    uint64_t horizon,
                    char **out_report);

/*
 Decides `A |> B @ T` or `A <| B @ T`. Types may use the aliases of
 `spec`, which may be null.
 */
int32_t ts_retype(const struct TsSpec *spec,
                  const char *query,
                  uint64_t horizon,
                  char **out_report);

/*
 Reads a certificate. Malformed JSON is `TS_BAD_INPUT`; well-formed JSON
 that does not describe a certificate is `TS_FAIL`.
 */
int32_t ts_cert_parse(const char *json, struct TsCert **out_cert, char **out_message);

void ts_cert_free(struct TsCert *cert);

int32_t ts_cert_to_json(const struct TsCert *cert, char **out_json);

/*
 First instant of the certified trajectory.
 */
int32_t ts_cert_lo(const struct TsCert *cert, uint64_t *out_lo);

/*
 End of the certified trajectory; `*out_infinite` is set when it has
 none, and `*out_hi` is then 0.
 */
int32_t ts_cert_hi(const struct TsCert *cert, uint64_t *out_hi, bool *out_infinite);

/*
 Re-checks a certificate at `probes` fresh channel names.
 */
int32_t ts_cert_validate(const struct TsCert *cert, uint64_t probes, char **out_report);

/*
 Membership of a certificate in `ty` at `time`, as a provider, or as a
 client when `client` is set. `spec` supplies aliases and may be null.
 */
int32_t ts_cert_semcheck(const struct TsCert *cert,
                         const struct TsSpec *spec,
                         const char *ty,
                         uint64_t time,
                         bool client,
                         uint64_t horizon,
                         char **out_report);

/*
 Releases a string returned by this library.
 */
void ts_string_free(char *s);

/*
 Library version, statically allocated.
 */
const char *ts_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TIMEDSESS_H */
