/* tslint:disable */
/* eslint-disable */

/**
 * A network growing between the input and output pads of a stock layout.
 */
export class Network {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Grows `cycles` cycles of a square wave on pad `a`, `b` grounded.
     */
    grow(amplitude: number, frequency: number, cycles: number): void;
    /**
     * `layout` is `compact` or `two_electrode`.
     */
    constructor(layout: string, seed: bigint);
    /**
     * JSON: cycle, node and branch counts, volume, bridge state, port
     * conductance with and without the electrolyte.
     */
    stats(): string;
    svg(): string;
}

/**
 * Fraction of a period two equal square waves are both positive when one
 * lags by `offset_ms`.
 */
export function overlap(frequency: number, offset_ms: number): number;

/**
 * JSON `[[t_h, G/G0], ...]` over a week for a synapse holding
 * `volume_ratio` times the weak-synapse deposit.
 */
export function retention(volume_ratio: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_network_free: (a: number, b: number) => void;
    readonly network_grow: (a: number, b: number, c: number, d: number) => [number, number];
    readonly network_new: (a: number, b: number, c: bigint) => [number, number, number];
    readonly network_stats: (a: number) => [number, number, number, number];
    readonly network_svg: (a: number) => [number, number];
    readonly overlap: (a: number, b: number) => [number, number, number];
    readonly retention: (a: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
