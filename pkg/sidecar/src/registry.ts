/** Model table advertised by /v1/models. Dims mirror the core's registry. */

export interface ModelEntry {
  name: string;
  dim: number;
  modality: "text" | "image" | "both";
}

export const MODEL_REGISTRY: ModelEntry[] = [
  { name: "vsrn", dim: 2048, modality: "both" },
  { name: "vse-infty", dim: 1024, modality: "both" },
  { name: "clip", dim: 512, modality: "both" },
  { name: "blip", dim: 256, modality: "both" },
  { name: "stub", dim: 64, modality: "both" },
];

export function modelByName(name: string): ModelEntry | undefined {
  return MODEL_REGISTRY.find((entry) => entry.name === name);
}
