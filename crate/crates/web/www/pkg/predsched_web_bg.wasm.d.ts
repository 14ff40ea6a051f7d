/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const closed_form: (a: number, b: number, c: number) => [number, number];
export const ratio_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const run_demo_experiment: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint, h: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
