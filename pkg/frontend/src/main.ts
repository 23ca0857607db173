/** Bootstrap: load runtime config, pick a rulebase, start a session. */

import { ApiClient } from "./api.js";
import { App, type AppElements } from "./app.js";
import type { AppConfig } from "./types.js";

function requireElement<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
}

async function loadConfig(): Promise<AppConfig> {
  try {
    const response = await fetch("./config.json");
    if (response.ok) return (await response.json()) as AppConfig;
  } catch {
    // fall through to the default below
  }
  return { apiBaseUrl: "http://127.0.0.1:8000" };
}

export async function bootstrap(): Promise<App> {
  const config = await loadConfig();
  const api = new ApiClient(config.apiBaseUrl);
  const elements: AppElements = {
    questionnaire: requireElement("questionnaire"),
    recommendations: requireElement("recommendations"),
    drugList: requireElement("drug-list"),
    drugInput: requireElement<HTMLInputElement>("drug-input"),
    drugAdd: requireElement<HTMLButtonElement>("drug-add"),
    status: requireElement("status"),
    toast: requireElement("toast"),
  };
  const app = new App(api, elements);

  const params = new URLSearchParams(window.location.search);
  const rulebases = await api.listRulebases();
  if (rulebases.length === 0) throw new Error("the service exposes no rulebases");
  const rulebaseId = params.get("rulebase") ?? rulebases[0].id;
  await app.start(rulebaseId, []);
  return app;
}

if (typeof document !== "undefined" && document.getElementById("questionnaire") !== null) {
  bootstrap().catch((error) => {
    const status = document.getElementById("status");
    if (status) status.textContent = `failed to start: ${error}`;
  });
}
