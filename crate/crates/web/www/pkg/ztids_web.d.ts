/* tslint:disable */
/* eslint-disable */

/**
 * `{points, labels, model, max_depth?, n_trees?, smote?, grid?, bounds?}`
 * to a labelled raster plus training metrics.
 */
export function decision_regions(request: string): string;

/**
 * Weighted F1, accuracy and per-class scores for two label lists given as
 * `{truth, predicted, classes}`.
 */
export function score_labels(request: string): string;

/**
 * `{points, labels, k?, seed?}` to `{points, labels, report}` of the
 * synthetic rows.
 */
export function smote_points(request: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly decision_regions: (a: number, b: number) => [number, number, number, number];
    readonly score_labels: (a: number, b: number) => [number, number, number, number];
    readonly smote_points: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
