import { beforeEach, describe, expect, it, vi } from "vitest";

import { renderRecommendations, renderView, type ViewHandlers } from "../src/view.js";
import { STAR_GLYPH } from "../src/theme.js";
import type { CodeRef, QuestionnaireView } from "../src/types.js";

const icd = (value: string, general = false): CodeRef => ({
  system: "ICD10",
  value,
  label: `label ${value}`,
  general,
});

function handlers(): ViewHandlers {
  return { onToggle: vi.fn(), onCodeChange: vi.fn() };
}

const sampleView: QuestionnaireView = {
  panels: [
    {
      category: "Digestive",
      color: "#d35400",
      items: [
        {
          conditionId: "constipation",
          label: "Constipation",
          checked: false,
          chosenCode: null,
          availableCodes: [icd("K59.0", true)],
          isNew: false,
          hasStar: false,
        },
      ],
    },
    {
      category: "Neurology",
      color: "#16a085",
      items: [
        {
          conditionId: "parkinsonism",
          label: "Parkinsonism",
          checked: true,
          chosenCode: null,
          availableCodes: [icd("G20", true), icd("G21.9")],
          isNew: true,
          hasStar: true,
        },
      ],
    },
  ],
};

describe("renderView", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<main id='root'></main>";
    root = document.getElementById("root") as HTMLElement;
  });

  it("renders panels in server order with title colors", () => {
    renderView(root, sampleView, handlers());
    const titles = [...root.querySelectorAll(".panel-title")].map((el) => el.textContent);
    expect(titles).toEqual(["Digestive", "Neurology"]);
    const panel = root.querySelector(".panel") as HTMLElement;
    expect(panel.style.getPropertyValue("--panel-color")).toBe("#d35400");
  });

  it("reflects checkbox state and marks", () => {
    renderView(root, sampleView, handlers());
    const constipation = root.querySelector("[data-condition-id='constipation']")!;
    const parkinsonism = root.querySelector("[data-condition-id='parkinsonism']")!;
    expect((constipation.querySelector("input") as HTMLInputElement).checked).toBe(false);
    expect((parkinsonism.querySelector("input") as HTMLInputElement).checked).toBe(true);
    expect(parkinsonism.classList.contains("is-new")).toBe(true);
    expect(parkinsonism.querySelector(".star")?.textContent).toBe(STAR_GLYPH);
    expect(constipation.querySelector(".star")).toBeNull();
    expect(constipation.classList.contains("is-new")).toBe(false);
  });

  it("shows a code drop-down only for checked items with several codes", () => {
    renderView(root, sampleView, handlers());
    expect(root.querySelector("[data-condition-id='constipation'] select")).toBeNull();
    const select = root.querySelector(
      "[data-condition-id='parkinsonism'] select",
    ) as HTMLSelectElement;
    expect(select).not.toBeNull();
    // defaults to the most general code
    expect(select.value).toBe("ICD10:G20");
  });

  it("prefers the chosen code over the general default", () => {
    const view = structuredClone(sampleView);
    view.panels[1].items[0].chosenCode = icd("G21.9");
    renderView(root, view, handlers());
    const select = root.querySelector(
      "[data-condition-id='parkinsonism'] select",
    ) as HTMLSelectElement;
    expect(select.value).toBe("ICD10:G21.9");
  });

  it("notifies on toggle", () => {
    const h = handlers();
    renderView(root, sampleView, h);
    const checkbox = root.querySelector(
      "[data-condition-id='constipation'] input",
    ) as HTMLInputElement;
    checkbox.checked = true;
    checkbox.dispatchEvent(new Event("change"));
    expect(h.onToggle).toHaveBeenCalledWith("constipation", true);
  });

  it("disables inputs while a request is pending", () => {
    renderView(root, sampleView, handlers(), true);
    for (const input of root.querySelectorAll("input, select")) {
      expect((input as HTMLInputElement).disabled).toBe(true);
    }
  });

  it("renders an empty state", () => {
    renderView(root, { panels: [] }, handlers());
    expect(root.querySelector(".empty-state")).not.toBeNull();
    expect(root.querySelectorAll(".panel")).toHaveLength(0);
  });

  it("renders a single panel when only one category has items", () => {
    renderView(root, { panels: [sampleView.panels[0]] }, handlers());
    expect(root.querySelectorAll(".panel")).toHaveLength(1);
  });
});

describe("renderRecommendations", () => {
  it("lists triggered rules with their verbs", () => {
    document.body.innerHTML = "<div id='recs'></div>";
    const root = document.getElementById("recs") as HTMLElement;
    renderRecommendations(root, [
      {
        ruleId: "D2",
        action: { verb: "start", target: "fibre", text: "Start Fibre supplements" },
        triggeringConditions: ["constipation", "diverticulosis"],
      },
    ]);
    const item = root.querySelector(".recommendation") as HTMLElement;
    expect(item.dataset.ruleId).toBe("D2");
    expect(item.querySelector(".verb")?.textContent).toBe("START");
    expect(item.textContent).toContain("Start Fibre supplements");
    renderRecommendations(root, []);
    expect(root.querySelector(".empty-state")).not.toBeNull();
  });
});
