/**
 * HTTP embedding service.
 *
 *   POST /v1/embed/text   {"model": str, "texts": [str]}
 *   POST /v1/embed/image  {"model": str, "images_b64": [str]}
 *     -> {"dim": int, "embeddings": [[float32, ...], ...]}
 *   GET  /v1/models       -> {"models": [{"name", "dim", "modality"}, ...]}
 *
 * 400 marks a contract violation (unknown model, malformed body,
 * undecodable image); 503 marks a model that is configured but has no
 * loaded backend. This build serves the deterministic stub for every
 * advertised model; wiring real encoders in means replacing `embedText`
 * / `embedImage` for the models that have checkpoints.
 *
 * Flags: --port N (default 8377), --models a,b,c (restrict served set),
 * --stub (accepted for compatibility; stub mode is the default and only
 * mode here).
 */

import { createServer as createHttpServer, IncomingMessage, Server, ServerResponse } from "node:http";

import { decodePng } from "./png.js";
import { MODEL_REGISTRY, modelByName } from "./registry.js";
import { stubImageVector, stubTextVector } from "./stub.js";

export interface SidecarOptions {
  models?: string[];
  stub?: boolean;
}

interface JsonBody {
  [key: string]: unknown;
}

function isStringArray(value: unknown): value is string[] {
  return Array.isArray(value) && value.every((item) => typeof item === "string");
}

function embedText(model: string, dim: number, texts: string[]): number[][] {
  return texts.map((text) => Array.from(stubTextVector(model, text, dim)));
}

function embedImage(model: string, dim: number, imagesB64: string[]): number[][] {
  return imagesB64.map((b64) => {
    const decoded = decodePng(Buffer.from(b64, "base64"));
    return Array.from(stubImageVector(model, decoded.width, decoded.height, decoded.rgb, dim));
  });
}

function sendJson(res: ServerResponse, status: number, payload: unknown): void {
  const body = JSON.stringify(payload);
  res.writeHead(status, { "content-type": "application/json", "content-length": Buffer.byteLength(body) });
  res.end(body);
}

function readBody(req: IncomingMessage): Promise<Buffer> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk: Buffer) => chunks.push(chunk));
    req.on("end", () => resolve(Buffer.concat(chunks)));
    req.on("error", reject);
  });
}

export function createSidecar(options: SidecarOptions = {}): Server {
  const served = new Set(options.models && options.models.length ? options.models : MODEL_REGISTRY.map((m) => m.name));
  const stubMode = options.stub !== false;

  return createHttpServer(async (req, res) => {
    try {
      if (req.method === "GET" && req.url === "/v1/models") {
        sendJson(res, 200, { models: MODEL_REGISTRY.filter((m) => served.has(m.name)) });
        return;
      }
      if (req.method !== "POST" || (req.url !== "/v1/embed/text" && req.url !== "/v1/embed/image")) {
        sendJson(res, 404, { error: `no such endpoint: ${req.method} ${req.url}` });
        return;
      }
      let body: JsonBody;
      try {
        body = JSON.parse((await readBody(req)).toString("utf8")) as JsonBody;
      } catch {
        sendJson(res, 400, { error: "request body is not valid JSON" });
        return;
      }
      const model = body["model"];
      if (typeof model !== "string" || !served.has(model) || !modelByName(model)) {
        sendJson(res, 400, { error: `unknown model ${JSON.stringify(model)}` });
        return;
      }
      if (!stubMode) {
        sendJson(res, 503, { error: `model ${model} has no loaded backend` });
        return;
      }
      const dim = modelByName(model)!.dim;
      if (req.url === "/v1/embed/text") {
        const texts = body["texts"];
        if (!isStringArray(texts)) {
          sendJson(res, 400, { error: "texts must be an array of strings" });
          return;
        }
        sendJson(res, 200, { dim, embeddings: embedText(model, dim, texts) });
        return;
      }
      const imagesB64 = body["images_b64"];
      if (!isStringArray(imagesB64)) {
        sendJson(res, 400, { error: "images_b64 must be an array of strings" });
        return;
      }
      let embeddings: number[][];
      try {
        embeddings = embedImage(model, dim, imagesB64);
      } catch (error) {
        sendJson(res, 400, { error: `image decode failed: ${(error as Error).message}` });
        return;
      }
      sendJson(res, 200, { dim, embeddings });
    } catch (error) {
      sendJson(res, 500, { error: (error as Error).message });
    }
  });
}

function parseArgs(argv: string[]): { port: number; options: SidecarOptions } {
  let port = 8377;
  const options: SidecarOptions = {};
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--port") {
      port = Number(argv[++i]);
    } else if (argv[i] === "--models") {
      options.models = (argv[++i] ?? "").split(",").filter(Boolean);
    } else if (argv[i] === "--stub") {
      options.stub = true;
    } else if (argv[i] === "--no-stub") {
      options.stub = false;
    }
  }
  return { port, options };
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  const { port, options } = parseArgs(process.argv.slice(2));
  const server = createSidecar(options);
  server.listen(port, () => {
    console.log(`sidecar listening on :${port}`);
  });
}
