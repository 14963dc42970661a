/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_network_free: (a: number, b: number) => void;
export const network_grow: (a: number, b: number, c: number, d: number) => [number, number];
export const network_new: (a: number, b: number, c: bigint) => [number, number, number];
export const network_stats: (a: number) => [number, number, number, number];
export const network_svg: (a: number) => [number, number];
export const overlap: (a: number, b: number) => [number, number, number];
export const retention: (a: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
