/** Pure DOM rendering of server-provided questionnaire state.
 *
 * Everything rendered here comes verbatim from the last server response: the
 * client never decides visibility, highlighting or star state on its own.
 */

import { STAR_GLYPH } from "./theme.js";
import type { CodeRef, QuestionnaireView, Recommendation, ViewItem } from "./types.js";

export interface ViewHandlers {
  onToggle(conditionId: string, checked: boolean): void;
  onCodeChange(conditionId: string, code: CodeRef): void;
}

function defaultCode(item: ViewItem): CodeRef | null {
  if (item.chosenCode) return item.chosenCode;
  return item.availableCodes.find((code) => code.general) ?? item.availableCodes[0] ?? null;
}

function renderItem(item: ViewItem, handlers: ViewHandlers, disabled: boolean): HTMLElement {
  const li = document.createElement("li");
  li.className = "item";
  li.dataset.conditionId = item.conditionId;
  if (item.isNew) li.classList.add("is-new");

  const label = document.createElement("label");
  const checkbox = document.createElement("input");
  checkbox.type = "checkbox";
  checkbox.checked = item.checked;
  checkbox.disabled = disabled;
  checkbox.addEventListener("change", () => {
    handlers.onToggle(item.conditionId, checkbox.checked);
  });
  label.appendChild(checkbox);

  const text = document.createElement("span");
  text.className = "item-label";
  text.textContent = item.label;
  label.appendChild(text);

  if (item.hasStar) {
    const star = document.createElement("span");
    star.className = "star";
    star.textContent = STAR_GLYPH;
    star.title = "appeared during this session";
    label.appendChild(star);
  }
  li.appendChild(label);

  if (item.checked && item.availableCodes.length > 1) {
    const select = document.createElement("select");
    select.className = "code-select";
    select.disabled = disabled;
    const chosen = defaultCode(item);
    for (const code of item.availableCodes) {
      const option = document.createElement("option");
      option.value = `${code.system}:${code.value}`;
      option.textContent = `${code.value} ${code.label}`.trim();
      option.selected =
        chosen !== null && code.system === chosen.system && code.value === chosen.value;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      const picked = item.availableCodes[select.selectedIndex];
      if (picked) handlers.onCodeChange(item.conditionId, picked);
    });
    li.appendChild(select);
  }
  return li;
}

export function renderView(
  root: HTMLElement,
  view: QuestionnaireView,
  handlers: ViewHandlers,
  disabled = false,
): void {
  root.textContent = "";
  if (view.panels.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No questions to ask for this patient profile.";
    root.appendChild(empty);
    return;
  }
  for (const panel of view.panels) {
    const section = document.createElement("section");
    section.className = "panel";
    section.style.setProperty("--panel-color", panel.color);

    const title = document.createElement("h2");
    title.className = "panel-title";
    title.textContent = panel.category;
    section.appendChild(title);

    const list = document.createElement("ul");
    list.className = "panel-items";
    for (const item of panel.items) {
      list.appendChild(renderItem(item, handlers, disabled));
    }
    section.appendChild(list);
    root.appendChild(section);
  }
}

export function renderRecommendations(root: HTMLElement, recommendations: Recommendation[]): void {
  root.textContent = "";
  if (recommendations.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No recommendations triggered yet.";
    root.appendChild(empty);
    return;
  }
  const list = document.createElement("ul");
  list.className = "recommendations";
  for (const rec of recommendations) {
    const li = document.createElement("li");
    li.className = "recommendation";
    li.dataset.ruleId = rec.ruleId;
    const badge = document.createElement("span");
    badge.className = `verb verb-${rec.action.verb}`;
    badge.textContent = rec.action.verb.toUpperCase();
    li.appendChild(badge);
    const text = document.createElement("span");
    text.textContent = ` ${rec.action.text} [${rec.ruleId}]`;
    li.appendChild(text);
    list.appendChild(li);
  }
  root.appendChild(list);
}

export function renderDrugList(
  root: HTMLElement,
  drugs: string[],
  onRemove: (drugId: string) => void,
  disabled = false,
): void {
  root.textContent = "";
  for (const drugId of drugs) {
    const chip = document.createElement("span");
    chip.className = "drug-chip";
    chip.dataset.drugId = drugId;
    const name = document.createElement("span");
    name.textContent = drugId;
    chip.appendChild(name);
    const remove = document.createElement("button");
    remove.type = "button";
    remove.className = "drug-remove";
    remove.textContent = "×";
    remove.disabled = disabled;
    remove.addEventListener("click", () => onRemove(drugId));
    chip.appendChild(remove);
    root.appendChild(chip);
  }
}
